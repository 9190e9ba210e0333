#include "dilp/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "dilp/diffcore.hpp"
#include "dilp/errors.hpp"

namespace dilp {

LiteralMatrix identify_predicates(const RuleWeights& w, double eta_prime, double epsilon) {
  if (!(eta_prime >= 0.0)) throw DomainError("identify_predicates: eta_prime must be non-negative");
  LiteralMatrix out{w.n(), w.m(), std::vector<LiteralKind>(w.n() * w.m(), LiteralKind::Identity)};
  for (std::size_t i = 0; i < w.n(); ++i) {
    for (std::size_t j = 0; j < w.m(); ++j) {
      const Triple p = softmax3(w.triple(i, j));
      double h = 0.0;
      for (double v : p) h -= v * std::log(v + epsilon);
      if (h > eta_prime) continue;
      const auto k = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      out.kinds[i * w.m() + j] = k == 0 ? LiteralKind::Positive : k == 1 ? LiteralKind::Negated : LiteralKind::Identity;
    }
  }
  return out;
}

CoverageReport coverage(const SymbolicRule& rule, const Dataset& data) {
  CoverageReport out;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.row(r);
    const bool holds = std::all_of(rule.body.begin(), rule.body.end(), [&](const SignedAtom& a) {
      if (a.atom >= data.m) throw DomainError("coverage: atom index out of range");
      return a.negated ? row[a.atom] < 0.5 : row[a.atom] > 0.5;
    });
    if (holds) {
      ++out.body_count;
      out.positive_count += data.labels[r] == 1;
    }
  }
  out.ratio = out.body_count == 0 ? 0.0 : static_cast<double>(out.positive_count) / static_cast<double>(out.body_count);
  return out;
}

std::vector<SymbolicRule> build_rules(const LiteralMatrix& literals, const Dataset* data) {
  std::vector<SymbolicRule> rules;
  for (std::size_t i = 0; i < literals.n; ++i) {
    SymbolicRule rule;
    for (std::size_t j = 0; j < literals.m; ++j) {
      const LiteralKind k = literals.at(i, j);
      if (k != LiteralKind::Identity) rule.body.push_back({j, k == LiteralKind::Negated});
    }
    if (rule.body.empty()) continue;
    if (std::find(rules.begin(), rules.end(), rule) == rules.end()) rules.push_back(std::move(rule));
  }
  if (data) {
    std::vector<std::pair<CoverageReport, SymbolicRule>> scored;
    for (auto& r : rules) scored.emplace_back(coverage(r, *data), std::move(r));
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first.ratio != b.first.ratio) return a.first.ratio > b.first.ratio;
      return a.first.body_count > b.first.body_count;
    });
    rules.clear();
    for (auto& [cov, r] : scored) rules.push_back(std::move(r));
  }
  return rules;
}

SyntaxReport validate_syntax(const SymbolicRule& rule, const PredicateSchema& schema) {
  SyntaxReport out;
  std::vector<std::size_t> count(schema.num_vars(), 0);
  for (const SignedAtom& a : rule.body) {
    if (a.atom >= schema.m()) throw DomainError("validate_syntax: atom index out of range");
    for (std::size_t k = 0; k < schema.num_vars(); ++k) count[k] += schema.contains(a.atom, k);
  }
  for (std::size_t k : schema.head_vars()) {
    if (count[k] == 0) out.violations.push_back("head variable " + PredicateSchema::var_name(k) + " does not occur in the body");
  }
  for (std::size_t k : schema.aux_vars()) {
    if (count[k] == 1) out.violations.push_back("auxiliary variable " + PredicateSchema::var_name(k) + " occurs in only one body atom");
  }
  out.valid = out.violations.empty();
  return out;
}

std::string render_rule(const SymbolicRule& rule, const PredicateSchema& schema) {
  std::string out = PredicateSchema::atom_text(schema.head());
  if (rule.body.empty()) return out + ".";
  out += " :- ";
  for (std::size_t t = 0; t < rule.body.size(); ++t) {
    const SignedAtom& a = rule.body[t];
    if (a.atom >= schema.m()) throw DomainError("render_rule: atom index out of range");
    if (t) out += " and ";
    out += a.negated ? "not(" + schema.body_text(a.atom) + ")" : schema.body_text(a.atom);
  }
  return out + ".";
}

namespace {

class RuleParser {
 public:
  RuleParser(std::string_view text, const PredicateSchema& schema) : s_(text), schema_(schema) {}

  SymbolicRule parse() {
    const Atom head = atom();
    if (head != schema_.head()) fail("head does not match " + PredicateSchema::atom_text(schema_.head()));
    SymbolicRule rule;
    skip();
    if (accept(".")) return finish(rule);
    expect(":-");
    do {
      skip();
      const std::size_t at = pos_;
      bool negated = false;
      if (s_.substr(pos_, 4) == "not(") {
        pos_ += 4;
        negated = true;
      }
      const Atom a = atom();
      if (negated) expect(")");
      const auto body = schema_.body();
      const auto it = std::find(body.begin(), body.end(), a);
      if (it == body.end()) fail("atom " + PredicateSchema::atom_text(a) + " is not in the schema", at);
      const auto j = static_cast<std::size_t>(it - body.begin());
      for (const auto& prev : rule.body) {
        if (prev.atom == j) fail("atom used twice", at);
      }
      rule.body.push_back({j, negated});
      skip();
    } while (keyword("and"));
    expect(".");
    return finish(rule);
  }

 private:
  SymbolicRule finish(SymbolicRule& rule) {
    skip();
    if (pos_ != s_.size()) fail("trailing text");
    std::sort(rule.body.begin(), rule.body.end(), [](const SignedAtom& a, const SignedAtom& b) { return a.atom < b.atom; });
    return rule;
  }

  [[noreturn]] void fail(const std::string& what, std::size_t at = std::string_view::npos) const {
    throw ParseError("rule: " + what, at == std::string_view::npos ? pos_ : at);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip();
    if (s_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  bool keyword(std::string_view word) {
    skip();
    if (s_.substr(pos_, word.size()) != word) return false;
    const std::size_t end = pos_ + word.size();
    if (end < s_.size() && !std::isspace(static_cast<unsigned char>(s_[end]))) return false;
    pos_ = end;
    return true;
  }

  static bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

  std::string name() {
    skip();
    const std::size_t begin = pos_;
    while (pos_ < s_.size() && name_char(s_[pos_])) ++pos_;
    if (begin == pos_) fail("expected a name");
    return std::string(s_.substr(begin, pos_ - begin));
  }

  Atom atom() {
    Atom a;
    a.predicate = name();
    if (!accept("(")) return a;
    do {
      skip();
      const std::size_t at = pos_;
      if (pos_ >= s_.size() || s_[pos_] != 'X') fail("expected a variable");
      ++pos_;
      std::size_t v = 0;
      const std::size_t digits = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        v = v * 10 + static_cast<std::size_t>(s_[pos_] - '0');
        ++pos_;
      }
      if (digits == pos_ || v == 0) fail("bad variable", at);
      a.vars.push_back(v - 1);
    } while (accept(","));
    expect(")");
    return a;
  }

  std::string_view s_;
  const PredicateSchema& schema_;
  std::size_t pos_ = 0;
};

}  // namespace

SymbolicRule parse_rule(std::string_view text, const PredicateSchema& schema) { return RuleParser(text, schema).parse(); }

double rule_accuracy(const std::vector<SymbolicRule>& rules, const Dataset& data) {
  if (data.empty()) return 0.0;
  std::vector<int> fired(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.row(r);
    fired[r] = std::any_of(rules.begin(), rules.end(), [&](const SymbolicRule& rule) {
      return std::all_of(rule.body.begin(), rule.body.end(),
                         [&](const SignedAtom& a) { return a.negated ? row[a.atom] < 0.5 : row[a.atom] > 0.5; });
    });
  }
  return data.example_accuracy(fired);
}

std::vector<SymbolicRule> rules_from_ast(const RuleAst& ast) {
  std::vector<SymbolicRule> out;
  for (const auto& conj : ast.subrules) {
    SymbolicRule r{conj};
    std::sort(r.body.begin(), r.body.end(), [](const SignedAtom& a, const SignedAtom& b) { return a.atom < b.atom; });
    out.push_back(std::move(r));
  }
  return out;
}

bool same_rules(std::vector<SymbolicRule> a, std::vector<SymbolicRule> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return a == b;
}

}  // namespace dilp

#include "dilp/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>

#include "dilp/errors.hpp"

namespace dilp {

std::string to_string(const GroundAtom& atom) {
  std::string out = atom.predicate;
  if (atom.args.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    if (i) out += ',';
    out += atom.args[i];
  }
  out += ')';
  return out;
}

void FactBase::validate() const {
  const std::set<std::string> known(domain.begin(), domain.end());
  if (known.size() != domain.size()) throw DomainError("facts: duplicate constant in domain");
  auto check = [&](const GroundAtom& a) {
    for (const auto& c : a.args) {
      if (!known.contains(c)) throw DomainError("facts: constant '" + c + "' in " + to_string(a) + " is outside the domain");
    }
  };
  for (const auto& a : background) check(a);
  for (const auto& a : positive) check(a);
  for (const auto& a : negative) check(a);
  const std::set<GroundAtom> pos(positive.begin(), positive.end());
  for (const auto& a : negative) {
    if (pos.contains(a)) throw DomainError("facts: " + to_string(a) + " is both positive and negative");
  }
}

namespace {

class Grounder {
 public:
  Grounder(const FactBase& facts, const PredicateSchema& schema) : facts_(facts), schema_(schema) {
    if (schema.m() == 0) throw DomainError("propositionalize: empty schema");
    facts.validate();
    for (std::size_t i = 0; i < facts.domain.size(); ++i) index_[facts.domain[i]] = i;
    known_ = facts.background;
    for (const auto& p : facts.positive) {
      if (p.predicate != schema.head().predicate) throw DomainError("propositionalize: example " + to_string(p) + " does not match the head predicate");
      known_.insert(p);
    }
    for (const auto& n : facts.negative) {
      if (n.predicate != schema.head().predicate) throw DomainError("propositionalize: example " + to_string(n) + " does not match the head predicate");
    }
  }

  std::size_t groundings() const {
    std::size_t count = 1;
    for (std::size_t k = 0; k < schema_.aux_vars().size(); ++k) count *= facts_.domain.size();
    return count;
  }

  // Calls `emit` with the valuation row of every auxiliary grounding of `example`.
  void each_row(const GroundAtom& example, const std::function<void(std::span<const double>)>& emit) const {
    const Atom& head = schema_.head();
    if (example.args.size() != head.vars.size()) throw DomainError("propositionalize: example " + to_string(example) + " has the wrong arity");
    std::vector<std::string> binding(schema_.num_vars());
    for (std::size_t a = 0; a < head.vars.size(); ++a) {
      if (!index_.contains(example.args[a])) throw DomainError("propositionalize: constant '" + example.args[a] + "' is outside the domain");
      auto& slot = binding[head.vars[a]];
      if (!slot.empty() && slot != example.args[a]) return;
      slot = example.args[a];
    }

    const auto& aux = schema_.aux_vars();
    const std::size_t d = facts_.domain.size();
    std::vector<std::size_t> odometer(aux.size(), 0);
    std::vector<double> row(schema_.m());
    GroundAtom probe;
    while (true) {
      for (std::size_t k = 0; k < aux.size(); ++k) binding[aux[k]] = facts_.domain[odometer[k]];
      for (std::size_t j = 0; j < schema_.m(); ++j) {
        const Atom& atom = schema_.body()[j];
        probe.predicate = atom.predicate;
        probe.args.resize(atom.vars.size());
        for (std::size_t a = 0; a < atom.vars.size(); ++a) probe.args[a] = binding[atom.vars[a]];
        row[j] = (probe != example && known_.contains(probe)) ? 1.0 : 0.0;
      }
      emit(row);

      std::size_t k = aux.size();
      while (k > 0 && ++odometer[k - 1] == d) odometer[--k] = 0;
      if (k == 0) break;
    }
  }

 private:
  const FactBase& facts_;
  const PredicateSchema& schema_;
  std::map<std::string, std::size_t> index_;
  std::set<GroundAtom> known_;
};

}  // namespace

Dataset propositionalize(const FactBase& facts, const PredicateSchema& schema) {
  const Grounder g(facts, schema);
  Dataset out(schema.m());
  const std::size_t rows = (facts.positive.size() + facts.negative.size()) * g.groundings();
  out.values.reserve(rows * schema.m());
  out.labels.reserve(rows);
  out.groups.reserve(rows);
  std::size_t id = 0;
  auto emit_all = [&](const std::vector<GroundAtom>& examples, int label) {
    for (const auto& ex : examples) {
      g.each_row(ex, [&](std::span<const double> row) {
        out.values.insert(out.values.end(), row.begin(), row.end());
        out.labels.push_back(label);
        out.groups.push_back(id);
      });
      ++id;
    }
  };
  emit_all(facts.positive, 1);
  emit_all(facts.negative, 0);
  return out;
}

bool derives(const FactBase& facts, const PredicateSchema& schema, const RuleAst& ast, const GroundAtom& example) {
  ast.validate(schema.m());
  const Grounder g(facts, schema);
  bool fired = false;
  g.each_row(example, [&](std::span<const double> row) { fired = fired || eval_rule(ast, row) == 1; });
  return fired;
}

namespace {

using Facts = std::vector<GroundAtom>;

GroundAtom fact(std::string pred, std::vector<std::string> args) { return {std::move(pred), std::move(args)}; }

std::vector<SignedAtom> lits(std::initializer_list<int> xs) {
  std::vector<SignedAtom> out;
  for (int l : xs) out.push_back({static_cast<std::size_t>(std::abs(l) - 1), l < 0});
  return out;
}

std::vector<std::string> numbers(int lo, int hi) {
  std::vector<std::string> out;
  for (int i = lo; i <= hi; ++i) out.push_back(std::to_string(i));
  return out;
}

std::vector<std::string> letters(char lo, char hi) {
  std::vector<std::string> out;
  for (char c = lo; c <= hi; ++c) out.emplace_back(1, c);
  return out;
}

// successor(i, i+1) for consecutive domain members plus zero(0).
std::set<GroundAtom> arithmetic_background(int hi) {
  std::set<GroundAtom> out{fact("zero", {"0"})};
  for (int i = 0; i < hi; ++i) out.insert(fact("successor", {std::to_string(i), std::to_string(i + 1)}));
  return out;
}

// Closed-world negatives: every head pair that is neither positive nor
// derivable by the reference rule.
void complete_negatives(Task& task) {
  const std::set<GroundAtom> pos(task.facts.positive.begin(), task.facts.positive.end());
  const auto& dom = task.facts.domain;
  for (const auto& x : dom) {
    for (const auto& y : dom) {
      GroundAtom cand = fact(task.schema.head().predicate, {x, y});
      if (pos.contains(cand)) continue;
      if (derives(task.facts, task.schema, task.reference, cand)) continue;
      task.facts.negative.push_back(std::move(cand));
    }
  }
}

Task predecessor_task() {
  Task t;
  t.name = "predecessor";
  t.schema = PredicateSchema({"predecessor", {0, 1}}, {{"successor", {1, 0}}});
  t.facts.domain = numbers(0, 8);
  t.facts.background = arithmetic_background(8);
  for (int i = 0; i <= 8; ++i) {
    for (int j = 0; j <= 8; ++j) {
      auto ex = fact("predecessor", {std::to_string(j), std::to_string(i)});
      (j == i + 1 ? t.facts.positive : t.facts.negative).push_back(std::move(ex));
    }
  }
  t.reference.subrules = {lits({1})};
  return t;
}

Task parity_task(bool odd) {
  const std::string p = odd ? "odd" : "even";
  Task t;
  t.name = p;
  t.schema = PredicateSchema({p, {2}}, {{"zero", {0}},
                                        {"zero", {1}},
                                        {"zero", {2}},
                                        {"successor", {0, 1}},
                                        {"successor", {1, 2}},
                                        {"successor", {0, 2}},
                                        {p, {0}},
                                        {p, {1}}});
  t.facts.domain = numbers(0, 30);
  t.facts.background = arithmetic_background(30);
  for (int i = 0; i <= 30; ++i) {
    const bool member = (i % 2 == 1) == odd;
    (member ? t.facts.positive : t.facts.negative).push_back(fact(p, {std::to_string(i)}));
  }
  if (odd) {
    t.reference.subrules = {lits({2, 5}), lits({5, -8}), lits({5, 4, 7})};
  } else {
    t.reference.subrules = {lits({3}), lits({5, -8}), lits({5, 4, 7})};
  }
  return t;
}

Task less_than_task() {
  Task t;
  t.name = "lessThan";
  t.schema = PredicateSchema({"lessThan", {2, 0}}, {{"successor", {0, 1}},
                                                    {"successor", {1, 2}},
                                                    {"successor", {0, 2}},
                                                    {"lessThan", {2, 1}},
                                                    {"lessThan", {1, 0}}});
  t.facts.domain = numbers(0, 9);
  t.facts.background = arithmetic_background(9);
  // Oriented so that the target rules hold over successor(i, i+1).
  for (int i = 0; i <= 9; ++i) {
    for (int j = 0; j <= 9; ++j) {
      auto ex = fact("lessThan", {std::to_string(i), std::to_string(j)});
      (i > j ? t.facts.positive : t.facts.negative).push_back(std::move(ex));
    }
  }
  t.reference.subrules = {lits({3}), lits({4, 5})};
  return t;
}

Task grandparent_task() {
  Task t;
  t.name = "grandparent";
  t.schema = builtin_rule("grandparent6").schema;
  t.facts.domain = letters('a', 'r');
  t.facts.background = {fact("mother", {"a", "c"}), fact("mother", {"c", "e"}), fact("mother", {"b", "d"}),
                        fact("mother", {"d", "f"}), fact("father", {"g", "h"}), fact("father", {"h", "i"}),
                        fact("father", {"j", "k"}), fact("father", {"k", "l"}), fact("mother", {"m", "n"}),
                        fact("father", {"n", "o"}), fact("father", {"p", "q"}), fact("mother", {"q", "r"})};
  t.facts.positive = {fact("grandparent", {"a", "e"}), fact("grandparent", {"b", "f"}),
                      fact("grandparent", {"g", "i"}), fact("grandparent", {"j", "l"}),
                      fact("grandparent", {"m", "o"}), fact("grandparent", {"p", "r"})};
  t.reference = builtin_rule("grandparent6").ast;
  complete_negatives(t);
  return t;
}

Task son_task() {
  Task t;
  t.name = "son";
  t.schema = PredicateSchema({"son", {0, 2}}, {{"father", {0, 1}},
                                              {"father", {1, 2}},
                                              {"father", {2, 0}},
                                              {"brother", {0, 1}},
                                              {"sister", {0, 1}},
                                              {"son", {1, 2}}});
  t.facts.domain = letters('a', 'l');
  t.facts.background = {fact("father", {"a", "b"}), fact("father", {"a", "c"}), fact("father", {"d", "e"}),
                        fact("father", {"d", "f"}), fact("father", {"g", "h"}), fact("father", {"g", "i"}),
                        fact("brother", {"b", "c"}), fact("brother", {"c", "b"}), fact("brother", {"e", "f"}),
                        fact("sister", {"f", "e"}), fact("sister", {"h", "i"}), fact("sister", {"i", "h"}),
                        // l's father fact is missing; l is a son only through his brother k.
                        fact("father", {"j", "k"}), fact("brother", {"k", "l"}), fact("brother", {"l", "k"})};
  t.facts.positive = {fact("son", {"b", "a"}), fact("son", {"c", "a"}), fact("son", {"e", "d"}),
                      fact("son", {"k", "j"}), fact("son", {"l", "j"})};
  t.reference.subrules = {lits({4, 6}), lits({3})};
  complete_negatives(t);
  return t;
}

Task related_task() {
  Task t;
  t.name = "related";
  t.schema = PredicateSchema({"related", {0, 2}}, {{"parent", {0, 1}},
                                                  {"parent", {1, 2}},
                                                  {"parent", {0, 2}},
                                                  {"parent", {2, 0}},
                                                  {"related", {0, 1}},
                                                  {"related", {1, 2}},
                                                  {"related", {2, 0}}});
  t.facts.domain = letters('a', 'h');
  t.facts.background = {fact("parent", {"a", "b"}), fact("parent", {"a", "c"}), fact("parent", {"c", "e"}),
                        fact("parent", {"c", "f"}), fact("parent", {"d", "c"}), fact("parent", {"g", "h"})};
  // Every pair inside a connected family is related, including each person to themself.
  const std::vector<std::vector<std::string>> families{{"a", "b", "c", "d", "e", "f"}, {"g", "h"}};
  for (const auto& fam : families) {
    for (const auto& x : fam) {
      for (const auto& y : fam) t.facts.positive.push_back(fact("related", {x, y}));
    }
  }
  t.reference.subrules = {lits({3}), lits({4}), lits({7}), lits({5, 6})};
  complete_negatives(t);
  return t;
}

Task father_task() {
  Task t;
  t.name = "father";
  t.schema = PredicateSchema({"father", {0, 2}}, {{"mother", {0, 1}},
                                                 {"mother", {1, 2}},
                                                 {"mother", {0, 2}},
                                                 {"husband", {0, 1}},
                                                 {"husband", {1, 2}},
                                                 {"husband", {0, 2}}});
  t.facts.domain = {"howard", "anne", "henry", "elizabeth", "john", "margaret", "louis", "adele", "philip"};
  t.facts.background = {fact("aunt_of", {"howard", "anne"}),     fact("aunt_of", {"anne", "henry"}),
                        fact("mother", {"anne", "elizabeth"}),   fact("husband", {"henry", "anne"}),
                        fact("brother_of", {"john", "margaret"}), fact("brother_of", {"henry", "louis"}),
                        fact("husband", {"louis", "adele"}),     fact("mother", {"adele", "philip"}),
                        fact("brother_of", {"philip", "margaret"})};
  t.facts.positive = {fact("father", {"louis", "philip"}), fact("father", {"henry", "elizabeth"})};
  t.reference.subrules = {lits({4, 2})};
  complete_negatives(t);
  return t;
}

Task directed_edge_task() {
  Task t;
  t.name = "directed_edge";
  t.schema = PredicateSchema({"d-edge", {0, 1}}, {{"edge", {0, 1}}, {"d-edge", {1, 0}}});
  t.facts.domain = letters('a', 'e');
  t.facts.background = {fact("edge", {"a", "b"}), fact("edge", {"b", "d"}), fact("edge", {"c", "c"}),
                        fact("edge", {"d", "e"})};
  t.facts.positive = {fact("d-edge", {"a", "b"}), fact("d-edge", {"b", "a"}), fact("d-edge", {"b", "d"}),
                      fact("d-edge", {"d", "b"}), fact("d-edge", {"c", "c"}), fact("d-edge", {"d", "e"})};
  t.reference.subrules = {lits({2}), lits({1})};
  complete_negatives(t);
  return t;
}

Task connectedness_task() {
  Task t;
  t.name = "connectedness";
  t.schema = PredicateSchema({"connectedness", {0, 2}}, {{"edge", {0, 2}},
                                                        {"edge", {2, 0}},
                                                        {"edge", {1, 2}},
                                                        {"connectedness", {0, 1}},
                                                        {"connectedness", {1, 2}}});
  t.facts.domain = letters('a', 'd');
  t.facts.background = {fact("edge", {"a", "b"}), fact("edge", {"b", "c"}), fact("edge", {"c", "d"}),
                        fact("edge", {"b", "a"})};
  for (const auto& [x, y] : std::vector<std::pair<std::string, std::string>>{
           {"a", "b"}, {"b", "c"}, {"c", "d"}, {"b", "a"}, {"a", "c"}, {"a", "d"}, {"a", "a"}, {"b", "d"}, {"b", "b"}}) {
    t.facts.positive.push_back(fact("connectedness", {x, y}));
  }
  t.reference.subrules = {lits({1}), lits({2}), lits({4, 3})};
  complete_negatives(t);
  return t;
}

}  // namespace

std::vector<std::string> builtin_task_names() {
  return {"predecessor", "odd",    "even",   "lessThan",      "grandparent",
          "son",         "related", "father", "directed_edge", "connectedness"};
}

Task builtin_task(const std::string& name) {
  Task t;
  if (name == "predecessor") t = predecessor_task();
  else if (name == "odd") t = parity_task(true);
  else if (name == "even") t = parity_task(false);
  else if (name == "lessThan") t = less_than_task();
  else if (name == "grandparent") t = grandparent_task();
  else if (name == "son") t = son_task();
  else if (name == "related") t = related_task();
  else if (name == "father") t = father_task();
  else if (name == "directed_edge") t = directed_edge_task();
  else if (name == "connectedness") t = connectedness_task();
  else throw DomainError("unknown task: " + name);
  t.facts.validate();
  t.reference.validate(t.schema.m());
  return t;
}

void write_facts(const FactBase& facts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open for writing: " + path.string());
  out << "#domain\n";
  for (const auto& c : facts.domain) out << c << '\n';
  auto section = [&](const char* title, const auto& atoms) {
    out << title << '\n';
    for (const auto& a : atoms) out << to_string(a) << ".\n";
  };
  section("#background", facts.background);
  section("#positive", facts.positive);
  section("#negative", facts.negative);
  if (!out) throw DomainError("write failed: " + path.string());
}

namespace {

bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

GroundAtom parse_ground_atom(std::string_view text, std::size_t lineno) {
  if (text.empty() || text.back() != '.') throw ParseError("fact must end with '.'", lineno);
  text.remove_suffix(1);
  GroundAtom atom;
  const std::size_t open = text.find('(');
  atom.predicate = std::string(trim(text.substr(0, open)));
  if (atom.predicate.empty() || !std::all_of(atom.predicate.begin(), atom.predicate.end(), name_char)) {
    throw ParseError("bad predicate name", lineno);
  }
  if (open == std::string_view::npos) return atom;
  if (text.back() != ')') throw ParseError("missing ')'", lineno);
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  while (true) {
    const std::size_t comma = inner.find(',');
    const std::string_view arg = trim(inner.substr(0, comma));
    if (arg.empty() || !std::all_of(arg.begin(), arg.end(), name_char)) throw ParseError("bad constant", lineno);
    atom.args.emplace_back(arg);
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  return atom;
}

}  // namespace

FactBase read_facts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open: " + path.string());
  FactBase facts;
  enum class Section { None, Domain, Background, Positive, Negative } section = Section::None;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto pct = line.find('%'); pct != std::string_view::npos) line = line.substr(0, pct);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line == "#domain") section = Section::Domain;
      else if (line == "#background") section = Section::Background;
      else if (line == "#positive") section = Section::Positive;
      else if (line == "#negative") section = Section::Negative;
      else throw ParseError("unknown section " + std::string(line), lineno);
      continue;
    }
    switch (section) {
      case Section::None:
        throw ParseError("content before the first section", lineno);
      case Section::Domain:
        if (!std::all_of(line.begin(), line.end(), name_char)) throw ParseError("bad constant", lineno);
        facts.domain.emplace_back(line);
        break;
      case Section::Background:
        facts.background.insert(parse_ground_atom(line, lineno));
        break;
      case Section::Positive:
        facts.positive.push_back(parse_ground_atom(line, lineno));
        break;
      case Section::Negative:
        facts.negative.push_back(parse_ground_atom(line, lineno));
        break;
    }
  }
  facts.validate();
  return facts;
}

}  // namespace dilp

#include "dilp/datasets.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dilp/errors.hpp"
#include "dilp/random.hpp"

namespace dilp {

void RuleAst::validate(std::size_t m) const {
  if (subrules.empty()) throw DomainError("rule: at least one subrule is required");
  for (const auto& conj : subrules) {
    if (conj.empty()) throw DomainError("rule: empty subrule");
    for (const SignedAtom& a : conj) {
      if (a.atom >= m) throw DomainError("rule: atom index out of range");
    }
  }
}

int eval_rule(const RuleAst& ast, std::span<const double> b) {
  for (const auto& conj : ast.subrules) {
    bool holds = true;
    for (const SignedAtom& a : conj) {
      const double v = a.negated ? 1.0 - b[a.atom] : b[a.atom];
      if (!(v > 0.5)) {
        holds = false;
        break;
      }
    }
    if (holds) return 1;
  }
  return 0;
}

Dataset gen_synthetic(std::size_t m, std::size_t rows, const RuleAst& ast, double noise, std::uint64_t seed) {
  ast.validate(m);
  if (!(noise >= 0.0 && noise < 0.5)) throw DomainError("gen_synthetic: noise must be in [0, 0.5)");
  if (rows == 0) throw DomainError("gen_synthetic: at least one row is required");
  Rng rng(seed);
  Dataset out(m);
  out.values.reserve(rows * m);
  out.labels.reserve(rows);
  std::vector<double> row(m);
  for (std::size_t r = 0; r < rows; ++r) {
    for (double& v : row) v = rng.uniform();
    int label = eval_rule(ast, row);
    if (rng.bernoulli(noise)) label = 1 - label;
    out.values.insert(out.values.end(), row.begin(), row.end());
    out.labels.push_back(label);
  }
  return out;
}

namespace {

// Literal shorthand: +k is b_k, -k is not b_k (1-based, as printed).
std::vector<SignedAtom> conj(std::initializer_list<int> lits) {
  std::vector<SignedAtom> out;
  for (int l : lits) {
    out.push_back({static_cast<std::size_t>(std::abs(l) - 1), l < 0});
  }
  return out;
}

PredicateSchema grandparent_schema() {
  return PredicateSchema({"grandparent", {0, 2}}, {{"father", {0, 1}},
                                                  {"father", {1, 2}},
                                                  {"father", {0, 2}},
                                                  {"mother", {0, 1}},
                                                  {"mother", {1, 2}},
                                                  {"mother", {0, 2}}});
}

}  // namespace

std::vector<std::string> builtin_rule_names() { return {"R1", "R2", "R3", "R4", "R5", "R6", "F2", "grandparent6"}; }

BuiltinRule builtin_rule(const std::string& name) {
  const auto r1 = conj({1, -9});
  const auto r2 = conj({-2, 8});
  const auto r3 = conj({3, -5, 7});
  const auto r4 = conj({-1, 9});
  const auto r5 = conj({2, -8});
  const auto r6 = conj({-3, 5, -7});

  BuiltinRule out;
  out.name = name;
  if (name == "R1") {
    out.ast.subrules = {r1};
  } else if (name == "R2") {
    out.ast.subrules = {r1, r2};
  } else if (name == "R3") {
    out.ast.subrules = {r1, r2, r3};
  } else if (name == "R4") {
    out.ast.subrules = {r4};
  } else if (name == "R5") {
    out.ast.subrules = {r4, r5};
  } else if (name == "R6") {
    out.ast.subrules = {r4, r5, r6};
  } else if (name == "F2") {
    out.m = 4;
    out.ast.subrules = {conj({-2, 4}), conj({1, -3})};
    out.schema = PredicateSchema::propositional(4);
    return out;
  } else if (name == "grandparent6") {
    // Atom order: father(X1,X2) father(X2,X3) father(X1,X3) mother(X1,X2) mother(X2,X3) mother(X1,X3)
    out.m = 6;
    out.ast.subrules = {conj({4, 5}), conj({1, 2}), conj({4, 2}), conj({1, 5})};
    out.schema = grandparent_schema();
    return out;
  } else {
    throw DomainError("unknown builtin rule: " + name);
  }
  out.m = 9;
  out.schema = PredicateSchema::propositional(9);
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("split: fraction must be in (0, 1)");
  if (data.size() < 2) throw DomainError("split: need at least two rows for two non-empty parts");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.size())));
  cut = std::clamp<std::size_t>(cut, 1, data.size() - 1);
  const std::span<const std::size_t> all(order);
  return {data.subset(all.first(cut)), data.subset(all.subspan(cut))};
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open for writing: " + path.string());
  for (std::size_t j = 0; j < data.m; ++j) out << "b_" << (j + 1) << ',';
  out << "label\n";
  char buf[64];
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (double v : data.row(r)) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
      out.write(buf, res.ptr - buf);
      out << ',';
    }
    out << data.labels[r] << '\n';
  }
  if (!out) throw DomainError("write failed: " + path.string());
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 2 || header.back() != "label") throw ParseError("header must end with 'label'", 1);
  const std::size_t m = header.size() - 1;
  for (std::size_t j = 0; j < m; ++j) {
    if (header[j] != "b_" + std::to_string(j + 1)) throw ParseError("header column " + std::to_string(j + 1) + " must be b_" + std::to_string(j + 1), 1);
  }

  Dataset data(m);
  std::vector<double> row(m);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != m + 1) throw ParseError("expected " + std::to_string(m + 1) + " fields", lineno);
    for (std::size_t j = 0; j < m; ++j) {
      const auto f = fields[j];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), row[j]);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size()) throw ParseError("bad number in column " + std::to_string(j + 1), lineno);
      if (!(row[j] >= 0.0 && row[j] <= 1.0)) throw ParseError("valuation outside [0, 1]", lineno);
    }
    const auto lf = fields[m];
    if (lf != "0" && lf != "1") throw ParseError("label must be 0 or 1", lineno);
    data.values.insert(data.values.end(), row.begin(), row.end());
    data.labels.push_back(lf == "1" ? 1 : 0);
  }
  return data;
}

}  // namespace dilp

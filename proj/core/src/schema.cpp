#include "dilp/schema.hpp"

#include <algorithm>
#include <unordered_map>

#include "dilp/errors.hpp"

namespace dilp {

PredicateSchema::PredicateSchema(Atom head, std::vector<Atom> body)
    : head_(std::move(head)), body_(std::move(body)) {
  if (body_.empty()) throw DomainError("schema: at least one body atom is required");
  std::size_t top = 0;
  auto scan = [&top](const Atom& a) {
    for (std::size_t v : a.vars) top = std::max(top, v + 1);
  };
  scan(head_);
  for (const Atom& a : body_) scan(a);
  num_vars_ = top;

  indicator_.assign(body_.size() * num_vars_, 0);
  for (std::size_t j = 0; j < body_.size(); ++j) {
    for (std::size_t v : body_[j].vars) indicator_[j * num_vars_ + v] = 1;
  }
  for (std::size_t k = 0; k < num_vars_; ++k) {
    const bool in_head = std::find(head_.vars.begin(), head_.vars.end(), k) != head_.vars.end();
    (in_head ? head_vars_ : aux_vars_).push_back(k);
  }
}

PredicateSchema PredicateSchema::propositional(std::size_t m, std::string head_name) {
  std::vector<Atom> body;
  body.reserve(m);
  for (std::size_t j = 0; j < m; ++j) body.push_back({"b" + std::to_string(j + 1), {}});
  return PredicateSchema({std::move(head_name), {}}, std::move(body));
}

std::string PredicateSchema::atom_text(const Atom& atom) {
  std::string out = atom.predicate;
  if (atom.vars.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < atom.vars.size(); ++i) {
    if (i) out += ", ";
    out += var_name(atom.vars[i]);
  }
  out += ')';
  return out;
}

void Dataset::push_back(std::span<const double> row, int label) {
  if (row.size() != m) throw DomainError("dataset: row width does not match m");
  if (label != 0 && label != 1) throw DomainError("dataset: label must be 0 or 1");
  for (double v : row) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("dataset: valuation outside [0, 1]");
  }
  values.insert(values.end(), row.begin(), row.end());
  labels.push_back(label);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out(m);
  out.values.reserve(rows.size() * m);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto src = row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
    out.labels.push_back(labels[r]);
    if (!groups.empty()) out.groups.push_back(groups[r]);
  }
  return out;
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

double Dataset::example_accuracy(std::span<const int> predicted) const {
  if (predicted.size() != size()) throw DomainError("example_accuracy: prediction count does not match rows");
  if (empty()) return 0.0;
  if (groups.empty()) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < size(); ++i) hits += (predicted[i] != 0) == (labels[i] == 1);
    return static_cast<double>(hits) / static_cast<double>(size());
  }
  if (groups.size() != size()) throw DomainError("example_accuracy: group count does not match rows");
  std::unordered_map<std::size_t, std::pair<int, int>> seen;  // id -> (label, fired)
  for (std::size_t i = 0; i < size(); ++i) {
    auto [it, fresh] = seen.try_emplace(groups[i], labels[i], 0);
    if (!fresh && it->second.first != labels[i]) throw DomainError("example_accuracy: mixed labels within an example");
    it->second.second |= predicted[i] != 0;
  }
  std::size_t hits = 0;
  for (const auto& [id, lf] : seen) hits += lf.first == lf.second;
  return static_cast<double>(hits) / static_cast<double>(seen.size());
}

}  // namespace dilp

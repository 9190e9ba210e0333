#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dilp {

/// Predicate template over logical variables. Variables are 0-based indices
/// rendered as X1, X2, ...; an atom with no variables is propositional.
struct Atom {
  std::string predicate;
  std::vector<std::size_t> vars;

  bool operator==(const Atom&) const = default;
};

/// Head atom plus the m candidate body atoms of a learning task.
///
/// Head variables are exactly those occurring in the head atom; every other
/// variable is auxiliary. `contains(j, k)` is the fixed variable-indicator
/// matrix used by the syntactic losses and validators.
class PredicateSchema {
 public:
  PredicateSchema() = default;
  PredicateSchema(Atom head, std::vector<Atom> body);

  /// Zero-arity schema: head `head_name`, body atoms b1..bm.
  static PredicateSchema propositional(std::size_t m, std::string head_name = "h");

  const Atom& head() const { return head_; }
  std::span<const Atom> body() const { return body_; }
  std::size_t m() const { return body_.size(); }
  std::size_t num_vars() const { return num_vars_; }
  bool contains(std::size_t atom, std::size_t var) const {
    return indicator_[atom * num_vars_ + var] != 0;
  }
  const std::vector<std::size_t>& head_vars() const { return head_vars_; }
  const std::vector<std::size_t>& aux_vars() const { return aux_vars_; }

  static std::string var_name(std::size_t var) { return "X" + std::to_string(var + 1); }
  static std::string atom_text(const Atom& atom);
  std::string body_text(std::size_t atom) const { return atom_text(body_[atom]); }

  bool operator==(const PredicateSchema& other) const {
    return head_ == other.head_ && body_ == other.body_;
  }

 private:
  Atom head_;
  std::vector<Atom> body_;
  std::size_t num_vars_ = 0;
  std::vector<unsigned char> indicator_;
  std::vector<std::size_t> head_vars_;
  std::vector<std::size_t> aux_vars_;
};

/// Table of m valuations in [0, 1] per row plus a binary head label.
struct Dataset {
  std::size_t m = 0;
  std::vector<double> values;  // row-major, size() x m
  std::vector<int> labels;
  // Example id of each row. Empty means every row is its own example; rows of
  // one example share its label and it counts as predicted positive when any
  // of its rows does.
  std::vector<std::size_t> groups;

  Dataset() = default;
  explicit Dataset(std::size_t width) : m(width) {}

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * m, m}; }

  /// Appends a row; throws DomainError on width mismatch, a value outside
  /// [0, 1], or a label outside {0, 1}.
  void push_back(std::span<const double> row, int label);

  Dataset subset(std::span<const std::size_t> rows) const;

  std::size_t positives() const;

  /// Fraction of examples whose prediction matches the label, given one 0/1
  /// prediction per row.
  double example_accuracy(std::span<const int> predicted) const;

  bool operator==(const Dataset&) const = default;
};

}  // namespace dilp

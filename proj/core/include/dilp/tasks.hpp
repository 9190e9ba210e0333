#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "dilp/datasets.hpp"
#include "dilp/schema.hpp"

namespace dilp {

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  auto operator<=>(const GroundAtom&) const = default;
};

std::string to_string(const GroundAtom& atom);

/// Background facts and labelled head examples over a finite constant domain.
struct FactBase {
  std::vector<std::string> domain;
  std::set<GroundAtom> background;
  std::vector<GroundAtom> positive;
  std::vector<GroundAtom> negative;

  /// Throws DomainError if positives and negatives overlap or an atom uses a
  /// constant outside the domain.
  void validate() const;
  bool operator==(const FactBase&) const = default;
};

/// One row per (labelled example, grounding of the auxiliary variables).
///
/// Head variables are bound positionally from the example's arguments;
/// auxiliary variables range over the domain in index order (last auxiliary
/// variable fastest). A body valuation is 1 when the ground atom is a
/// background fact or, for the head predicate, a positive example other than
/// the row's own example.
Dataset propositionalize(const FactBase& facts, const PredicateSchema& schema);

/// True iff `ast` fires on some auxiliary grounding of `example`.
bool derives(const FactBase& facts, const PredicateSchema& schema, const RuleAst& ast, const GroundAtom& example);

struct Task {
  std::string name;
  FactBase facts;
  PredicateSchema schema;
  RuleAst reference;  // target rule over the schema's body atoms
};

/// predecessor, odd, even, lessThan, grandparent, son, related, father,
/// directed_edge, connectedness.
///
/// Where no negative set is given, negatives are every remaining head pair
/// over the domain that the reference rule does not derive from the
/// background and positives; derivable non-positives stay unlabelled.
Task builtin_task(const std::string& name);
std::vector<std::string> builtin_task_names();

/// Sectioned fact file: "#domain" (one constant per line), "#background",
/// "#positive", "#negative" (one "pred(c1,c2)." per line). '%' starts a comment.
void write_facts(const FactBase& facts, const std::filesystem::path& path);
FactBase read_facts(const std::filesystem::path& path);

}  // namespace dilp

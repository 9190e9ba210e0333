#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dilp/schema.hpp"

namespace dilp {

/// Reference to body atom `atom` (0-based), optionally negated.
struct SignedAtom {
  std::size_t atom = 0;
  bool negated = false;

  bool operator==(const SignedAtom&) const = default;
};

/// Disjunction of conjunctions of signed atoms; the target of a synthetic task.
struct RuleAst {
  std::vector<std::vector<SignedAtom>> subrules;

  /// Throws DomainError if the rule is empty, has an empty subrule, or
  /// references an atom >= m.
  void validate(std::size_t m) const;
  bool operator==(const RuleAst&) const = default;
};

/// Crisp label: 1 iff some subrule has b > 0.5 on every positive atom and
/// 1 - b > 0.5 on every negated atom.
int eval_rule(const RuleAst& ast, std::span<const double> valuations);

/// N rows of i.i.d. Uniform(0, 1) valuations labelled by `ast`, each label
/// flipped independently with probability `noise`.
Dataset gen_synthetic(std::size_t m, std::size_t rows, const RuleAst& ast, double noise, std::uint64_t seed);

struct BuiltinRule {
  std::string name;
  std::size_t m = 0;
  RuleAst ast;
  PredicateSchema schema;
};

/// R1..R6, F2, grandparent6. Throws DomainError for other names.
BuiltinRule builtin_rule(const std::string& name);
std::vector<std::string> builtin_rule_names();

/// Deterministic shuffled split; the first round(fraction * N) shuffled rows
/// form the training part. Both parts are non-empty.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed);

/// Header "b_1,...,b_m,label", one row per line, values at 17 significant digits.
void save_csv(const Dataset& data, const std::filesystem::path& path);

/// Inverse of save_csv. Throws ParseError carrying the 1-based line number.
Dataset load_csv(const std::filesystem::path& path);

}  // namespace dilp

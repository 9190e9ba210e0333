#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dilp/datasets.hpp"
#include "dilp/rule_model.hpp"
#include "dilp/schema.hpp"

namespace dilp {

enum class LiteralKind { Positive, Negated, Identity };

/// Selected subpredicate per (subrule, atom), n x m row-major.
struct LiteralMatrix {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<LiteralKind> kinds;

  LiteralKind at(std::size_t i, std::size_t j) const { return kinds[i * m + j]; }
};

/// Picks argmax softmax3(W_ij) where its entropy is at most `eta_prime`,
/// Identity elsewhere.
LiteralMatrix identify_predicates(const RuleWeights& w, double eta_prime, double epsilon = 1e-6);

/// Body literals sorted by atom index; the head is the schema head.
struct SymbolicRule {
  std::vector<SignedAtom> body;

  bool operator==(const SymbolicRule&) const = default;
  auto operator<=>(const SymbolicRule& other) const {
    return std::lexicographical_compare_three_way(
        body.begin(), body.end(), other.body.begin(), other.body.end(), [](const SignedAtom& a, const SignedAtom& b) {
          if (auto c = a.atom <=> b.atom; c != 0) return c;
          return a.negated <=> b.negated;
        });
  }
};

struct CoverageReport {
  std::size_t body_count = 0;      // N_b
  std::size_t positive_count = 0;  // N_r
  double ratio = 0.0;

  bool operator==(const CoverageReport&) const = default;
};

/// N_b rows where every positive literal has b > 0.5 and every negated one
/// b < 0.5; N_r of those labelled 1.
CoverageReport coverage(const SymbolicRule& rule, const Dataset& data);

/// One rule per non-empty subrule with duplicates merged. With `data`, rules
/// are ordered by descending coverage ratio then N_b; otherwise by subrule.
std::vector<SymbolicRule> build_rules(const LiteralMatrix& literals, const Dataset* data = nullptr);

struct SyntaxReport {
  bool valid = true;
  std::vector<std::string> violations;
};

/// Head-variable inclusion and auxiliary-variable connectivity checks.
SyntaxReport validate_syntax(const SymbolicRule& rule, const PredicateSchema& schema);

/// "head(X1, X3) :- father(X1, X2) and not(mother(X2, X3))."
std::string render_rule(const SymbolicRule& rule, const PredicateSchema& schema);

/// Inverse of render_rule. Throws ParseError with the character offset.
SymbolicRule parse_rule(std::string_view text, const PredicateSchema& schema);

/// Example accuracy of the prediction "some rule body holds" on each row.
double rule_accuracy(const std::vector<SymbolicRule>& rules, const Dataset& data);

std::vector<SymbolicRule> rules_from_ast(const RuleAst& ast);

/// Order-insensitive equality of two rule sets.
bool same_rules(std::vector<SymbolicRule> a, std::vector<SymbolicRule> b);

}  // namespace dilp

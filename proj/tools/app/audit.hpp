#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dilp/losses.hpp"
#include "dilp/random.hpp"

namespace dilp::app {

struct AuditRow {
  std::string operation;
  std::size_t points = 0;
  double worst_relative_error = 0.0;
};

/// A random structured objective: n <= 4 subrules over m <= 9 binary atoms
/// with head and auxiliary variables, a batch of `batch` rows, and every loss
/// coefficient strictly positive.
struct ObjectiveInstance {
  PredicateSchema schema;
  Dataset batch;
  RuleWeights weights;
  NetworkParams params;
  LossWeights loss;
};

ObjectiveInstance random_objective(Rng& rng, std::size_t batch = 16);

/// Worst relative error of a central-difference check of the total objective.
double check_objective(const ObjectiveInstance& instance, double h = 1e-6);

/// Checks every differentiable operation at `points` random inputs each.
std::vector<AuditRow> gradient_audit(std::uint64_t seed, std::size_t points = 100);

}  // namespace dilp::app

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dilp/rule_model.hpp"
#include "dilp/schema.hpp"

namespace dilp {

/// Coefficients of the total objective plus the fixed shape parameters of
/// the syntactic terms.
struct LossWeights {
  double lambda_E = 0.0;
  double lambda_S = 0.0;
  double lambda_R = 0.0;
  double lambda_C = 0.0;
  double lambda_D = 0.0;
  double eta = 0.1;
  double c1 = 1.0;
  double c2 = 12.5;
  double epsilon = 1e-6;
};

/// Maxima reached by the progressive schedule at t = T.
struct ScheduleConfig {
  double lambda_E_max = 0.1;
  double lambda_S_max = 0.2;
  double lambda_S_min = 0.0;
  double lambda_R_max = 1.0;
  double lambda_C_max = 5.0;
  double lambda_D_max = 0.001;
  std::size_t total_epochs = 500;
};

/// Expected usage count M[i][k] of variable k in subrule i (n x K, row-major).
struct VariableUsage {
  std::size_t n = 0;
  std::size_t num_vars = 0;
  std::vector<double> counts;

  double at(std::size_t i, std::size_t k) const { return counts[i * num_vars + k]; }
  double& at(std::size_t i, std::size_t k) { return counts[i * num_vars + k]; }
};

// Every loss below optionally accumulates its gradient into the trailing
// span argument (same layout as the input it differentiates). An empty span
// skips the gradient.

/// Summed binary cross-entropy; predictions are clamped to
/// [1e-12, 1 - 1e-12]. Throws DomainError for labels outside {0, 1}.
double bce(std::span<const double> predictions, std::span<const int> labels,
           std::span<double> grad_predictions = {});

/// -sum p log(p + eps) over all n x m x 3 subpredicate probabilities.
double entropy_loss(std::span<const double> probs, double epsilon, std::span<double> grad_probs = {});

/// Scaled pairwise cosine similarity of the flattened per-subrule logits,
/// normalized by 2 / (n (n + 1)). Norms are floored at 1e-12.
double similarity_loss(const RuleWeights& w, std::span<double> grad_logits = {});

/// M[i][k] = sum_j (1 - p3_ij) [X_k in atom j].
VariableUsage variable_usage(std::span<const double> probs, std::size_t n, const PredicateSchema& schema);

/// Pulls dL/dM back to dL/dprobs (only the identity component is touched).
void variable_usage_vjp(const VariableUsage& grad_usage, const PredicateSchema& schema,
                        std::span<double> grad_probs);

double range_loss(const VariableUsage& usage, std::span<const std::size_t> head_vars, double eta,
                  VariableUsage* grad_usage = nullptr);

double connected_loss(const VariableUsage& usage, std::span<const std::size_t> aux_vars, double c1,
                      double c2, VariableUsage* grad_usage = nullptr);

/// Mean over every (subrule, variable) pair of (1 - sin(2 pi M + pi / 2)) / 2.
/// Zero when the schema has no variables.
double digitization_loss(const VariableUsage& usage, VariableUsage* grad_usage = nullptr);

/// Number of subrules and variable-set sizes that the schedule normalizes by.
struct ScheduleShape {
  std::size_t subrules = 1;
  std::size_t head_vars = 0;
  std::size_t aux_vars = 0;
};

/// Loss coefficients at epoch t in [0, T]. Only the lambda_* fields of the
/// result are set; the rest keep their defaults. A syntactic coefficient whose
/// variable set is empty is 0. Throws DomainError for t > T.
LossWeights schedule(std::size_t t, const ScheduleConfig& cfg, const ScheduleShape& shape);

struct LossParts {
  double bce = 0.0;
  double entropy = 0.0;
  double similarity = 0.0;
  double range = 0.0;
  double connected = 0.0;
  double digitization = 0.0;
};

/// L_BCE + sum_X lambda_X L_X.
double total_loss(const LossParts& parts, const LossWeights& weights);

struct Objective {
  double value = 0.0;
  LossParts parts;
  RuleWeights gradient;
  std::vector<double> predictions;
};

/// Forward pass, all six loss terms, and the exact gradient of the weighted
/// total with respect to the logits.
Objective evaluate_objective(const RuleWeights& w, const Dataset& batch, const PredicateSchema& schema,
                             const NetworkParams& params, const LossWeights& weights);

}  // namespace dilp

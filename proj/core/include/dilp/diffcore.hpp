#pragma once

// Differentiable scalar primitives used by the rule network. Each forward
// function has a matching closed-form gradient; `grad_check` compares any of
// them against central finite differences.

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace dilp {

using Triple = std::array<double, 3>;

/// Numerically stable softmax over three logits. Throws DomainError on
/// non-finite input.
Triple softmax3(const Triple& logits);

/// Vector-Jacobian product of softmax3: given p = softmax3(w) and dL/dp,
/// returns dL/dw.
Triple softmax3_vjp(const Triple& probs, const Triple& grad_probs);

/// Three-argument product t-conorm: 1 - (1-x)(1-y)(1-z).
double prob_sum(double x, double y, double z);

/// Partial derivatives of prob_sum with respect to (x, y, z).
Triple prob_sum_grad(double x, double y, double z);

enum class AggregateMode { Min, Max };

/// Softmin (Min) or softmax (Max) attention: sum_j a_j v_j with
/// a = softmax(s * beta * v), s = -1 for Min and +1 for Max.
/// If `weights` is non-empty it receives the attention weights (same size as
/// `values`). Throws DomainError for an empty input or beta <= 0.
double attention_aggregate(std::span<const double> values, double beta, AggregateMode mode,
                           std::span<double> weights = {});

/// d(attention)/d(values) scaled by `upstream`, accumulated into `grad_values`.
/// Needs the forward weights and result.
void attention_aggregate_vjp(std::span<const double> values, std::span<const double> weights,
                             double result, double beta, AggregateMode mode, double upstream,
                             std::span<double> grad_values);

/// 1 / (1 + exp(-lambda (x - gamma))).
double sharp_sigmoid(double x, double lambda, double gamma);

/// Gradient of sharp_sigmoid with respect to (x, lambda, gamma).
Triple sharp_sigmoid_grad(double x, double lambda, double gamma);

/// Scalar function of a real vector together with its analytic gradient.
struct Differentiable {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

/// Compares the analytic gradient with central differences of step `h` at
/// `point`. Relative error per coordinate is |a - f| / max(|a|, |f|, scale_floor);
/// the floor keeps coordinates whose true derivative is ~0 from reporting
/// roundoff as a large relative error.
GradCheckResult grad_check(const Differentiable& f, std::span<const double> point,
                           double h = 1e-5, double scale_floor = 1e-3);

}  // namespace dilp

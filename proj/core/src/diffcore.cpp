#include "dilp/diffcore.hpp"

#include <algorithm>
#include <cmath>

#include "dilp/errors.hpp"

namespace dilp {

Triple softmax3(const Triple& logits) {
  for (double w : logits) {
    if (!std::isfinite(w)) throw DomainError("softmax3: non-finite logit");
  }
  const double top = std::max({logits[0], logits[1], logits[2]});
  Triple p{std::exp(logits[0] - top), std::exp(logits[1] - top), std::exp(logits[2] - top)};
  const double z = p[0] + p[1] + p[2];
  for (double& v : p) v /= z;
  return p;
}

Triple softmax3_vjp(const Triple& probs, const Triple& grad_probs) {
  const double dot = probs[0] * grad_probs[0] + probs[1] * grad_probs[1] + probs[2] * grad_probs[2];
  return {probs[0] * (grad_probs[0] - dot), probs[1] * (grad_probs[1] - dot),
          probs[2] * (grad_probs[2] - dot)};
}

double prob_sum(double x, double y, double z) { return 1.0 - (1.0 - x) * (1.0 - y) * (1.0 - z); }

Triple prob_sum_grad(double x, double y, double z) {
  return {(1.0 - y) * (1.0 - z), (1.0 - x) * (1.0 - z), (1.0 - x) * (1.0 - y)};
}

double attention_aggregate(std::span<const double> values, double beta, AggregateMode mode,
                           std::span<double> weights) {
  if (values.empty()) throw DomainError("attention_aggregate: empty input");
  if (!(beta > 0.0)) throw DomainError("attention_aggregate: beta must be positive");
  const double sign = mode == AggregateMode::Min ? -1.0 : 1.0;

  // The largest score belongs to the smallest value (Min) or the largest (Max).
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double top = sign * beta * (mode == AggregateMode::Min ? *lo : *hi);

  double z = 0.0;
  double acc = 0.0;
  const bool keep = !weights.empty();
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double e = std::exp(sign * beta * values[j] - top);
    if (keep) weights[j] = e;
    z += e;
    acc += e * values[j];
  }
  if (keep) {
    for (std::size_t j = 0; j < values.size(); ++j) weights[j] /= z;
  }
  return acc / z;
}

void attention_aggregate_vjp(std::span<const double> values, std::span<const double> weights,
                             double result, double beta, AggregateMode mode, double upstream,
                             std::span<double> grad_values) {
  // d/dv_j sum_k a_k v_k = a_j (1 + s beta (v_j - result))
  const double sb = (mode == AggregateMode::Min ? -1.0 : 1.0) * beta;
  for (std::size_t j = 0; j < values.size(); ++j) {
    grad_values[j] += upstream * weights[j] * (1.0 + sb * (values[j] - result));
  }
}

double sharp_sigmoid(double x, double lambda, double gamma) {
  const double t = lambda * (x - gamma);
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Triple sharp_sigmoid_grad(double x, double lambda, double gamma) {
  const double s = sharp_sigmoid(x, lambda, gamma);
  const double ds = s * (1.0 - s);
  return {lambda * ds, (x - gamma) * ds, -lambda * ds};
}

GradCheckResult grad_check(const Differentiable& f, std::span<const double> point, double h,
                           double scale_floor) {
  GradCheckResult out;
  out.analytic = f.gradient(point);
  out.numeric.resize(point.size());
  std::vector<double> probe(point.begin(), point.end());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f.value(probe);
    probe[i] = orig - h;
    const double down = f.value(probe);
    probe[i] = orig;
    out.numeric[i] = (up - down) / (2.0 * h);

    const double a = out.analytic[i];
    const double n = out.numeric[i];
    const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), scale_floor});
    // NaN compares false, so it is recorded as the worst coordinate.
    if (!(rel <= out.max_relative_error)) {
      out.max_relative_error = rel;
      out.worst_index = i;
    }
  }
  return out;
}

}  // namespace dilp

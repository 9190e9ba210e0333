#include "dilp/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dilp/errors.hpp"

namespace dilp {

namespace {
constexpr double kClamp = 1e-12;
constexpr double kNormFloor = 1e-12;
}  // namespace

double bce(std::span<const double> predictions, std::span<const int> labels,
           std::span<double> grad_predictions) {
  if (predictions.size() != labels.size()) throw DomainError("bce: size mismatch");
  double total = 0.0;
  for (std::size_t e = 0; e < predictions.size(); ++e) {
    const int h = labels[e];
    if (h != 0 && h != 1) throw DomainError("bce: label must be 0 or 1");
    const double raw = predictions[e];
    const double p = std::clamp(raw, kClamp, 1.0 - kClamp);
    total += h ? -std::log(p) : -std::log(1.0 - p);
    if (!grad_predictions.empty() && p == raw) {
      grad_predictions[e] += h ? -1.0 / p : 1.0 / (1.0 - p);
    }
  }
  return total;
}

double entropy_loss(std::span<const double> probs, double epsilon, std::span<double> grad_probs) {
  double total = 0.0;
  const bool grad = !grad_probs.empty();
  for (std::size_t t = 0; t < probs.size(); ++t) {
    const double p = probs[t];
    const double lg = std::log(p + epsilon);
    total -= p * lg;
    if (grad) grad_probs[t] += -lg - p / (p + epsilon);
  }
  return total;
}

double similarity_loss(const RuleWeights& w, std::span<double> grad_logits) {
  const std::size_t n = w.n();
  if (n < 2) return 0.0;
  const std::size_t len = w.m() * 3;
  const double scale = 2.0 / (static_cast<double>(n) * static_cast<double>(n + 1));

  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : w.subrule(i)) s += v * v;
    norms[i] = std::max(std::sqrt(s), kNormFloor);
  }

  double total = 0.0;
  const bool grad = !grad_logits.empty();
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = w.subrule(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = w.subrule(j);
      double dot = 0.0;
      for (std::size_t k = 0; k < len; ++k) dot += a[k] * b[k];
      const double na = norms[i];
      const double nb = norms[j];
      const double cos = dot / (na * nb);
      total += cos;
      if (!grad) continue;
      // d cos / da = b / (|a||b|) - cos a / |a|^2
      double* ga = grad_logits.data() + i * len;
      double* gb = grad_logits.data() + j * len;
      for (std::size_t k = 0; k < len; ++k) {
        ga[k] += scale * (b[k] / (na * nb) - cos * a[k] / (na * na));
        gb[k] += scale * (a[k] / (na * nb) - cos * b[k] / (nb * nb));
      }
    }
  }
  return scale * total;
}

VariableUsage variable_usage(std::span<const double> probs, std::size_t n, const PredicateSchema& schema) {
  const std::size_t m = schema.m();
  const std::size_t kv = schema.num_vars();
  if (probs.size() != n * m * 3) throw DomainError("variable_usage: probabilities do not match n x m x 3");
  VariableUsage u{n, kv, std::vector<double>(n * kv, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double include = 1.0 - probs[(i * m + j) * 3 + 2];
      for (std::size_t k : schema.body()[j].vars) u.at(i, k) += include;
    }
  }
  return u;
}

void variable_usage_vjp(const VariableUsage& grad_usage, const PredicateSchema& schema,
                        std::span<double> grad_probs) {
  const std::size_t m = schema.m();
  for (std::size_t i = 0; i < grad_usage.n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double g = 0.0;
      for (std::size_t k : schema.body()[j].vars) g += grad_usage.at(i, k);
      grad_probs[(i * m + j) * 3 + 2] -= g;
    }
  }
}

double range_loss(const VariableUsage& usage, std::span<const std::size_t> head_vars, double eta,
                  VariableUsage* grad_usage) {
  double total = 0.0;
  for (std::size_t i = 0; i < usage.n; ++i) {
    for (std::size_t k : head_vars) {
      const double d = usage.at(i, k) - 1.0;
      if (d < 0.0) {
        total += d * d;
        if (grad_usage) grad_usage->at(i, k) += 2.0 * d;
      } else {
        total += eta * d;
        if (grad_usage) grad_usage->at(i, k) += eta;
      }
    }
  }
  return total;
}

double connected_loss(const VariableUsage& usage, std::span<const std::size_t> aux_vars, double c1,
                      double c2, VariableUsage* grad_usage) {
  double total = 0.0;
  for (std::size_t i = 0; i < usage.n; ++i) {
    for (std::size_t k : aux_vars) {
      const double mk = usage.at(i, k);
      if (mk < 2.0) {
        const double d = mk - 1.0;
        const double bell = c1 * std::exp(-c2 * d * d);
        total += bell;
        if (grad_usage) grad_usage->at(i, k) += bell * (-2.0 * c2 * d);
      } else {
        const double d = mk - 2.0;
        total += d * d;
        if (grad_usage) grad_usage->at(i, k) += 2.0 * d;
      }
    }
  }
  return total;
}

double digitization_loss(const VariableUsage& usage, VariableUsage* grad_usage) {
  const std::size_t count = usage.n * usage.num_vars;
  if (count == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(count);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double total = 0.0;
  for (std::size_t t = 0; t < count; ++t) {
    const double mk = usage.counts[t];
    total += 0.5 * (1.0 - std::sin(two_pi * mk + std::numbers::pi / 2.0));
    // d/dM of -sin(2 pi M + pi/2) / 2 is pi sin(2 pi M)
    if (grad_usage) grad_usage->counts[t] += inv * std::numbers::pi * std::sin(two_pi * mk);
  }
  return total * inv;
}

LossWeights schedule(std::size_t t, const ScheduleConfig& cfg, const ScheduleShape& shape) {
  if (cfg.total_epochs == 0) throw DomainError("schedule: T must be at least 1");
  if (t > cfg.total_epochs) throw DomainError("schedule: epoch beyond T");
  const double rho = static_cast<double>(t) / static_cast<double>(cfg.total_epochs);
  const double rho2 = rho * rho;
  const double n = static_cast<double>(std::max<std::size_t>(shape.subrules, 1));

  LossWeights w;
  w.lambda_E = rho * cfg.lambda_E_max;
  w.lambda_S = cfg.lambda_S_max - rho2 * (cfg.lambda_S_max - cfg.lambda_S_min);
  w.lambda_R = shape.head_vars ? rho2 / (static_cast<double>(shape.head_vars) * n) * cfg.lambda_R_max : 0.0;
  w.lambda_C = shape.aux_vars ? rho2 / (static_cast<double>(shape.aux_vars) * n) * cfg.lambda_C_max : 0.0;
  w.lambda_D = rho2 * cfg.lambda_D_max;
  return w;
}

double total_loss(const LossParts& parts, const LossWeights& w) {
  return parts.bce + w.lambda_E * parts.entropy + w.lambda_S * parts.similarity + w.lambda_R * parts.range +
         w.lambda_C * parts.connected + w.lambda_D * parts.digitization;
}

Objective evaluate_objective(const RuleWeights& w, const Dataset& batch, const PredicateSchema& schema,
                             const NetworkParams& params, const LossWeights& lw) {
  if (schema.m() != w.m()) throw DomainError("objective: schema and weights disagree on m");
  const std::size_t n = w.n();

  Objective out;
  ForwardTrace trace = forward(w, batch, params);
  out.predictions = trace.predictions;

  std::vector<double> grad_pred(batch.size(), 0.0);
  out.parts.bce = bce(trace.predictions, batch.labels, grad_pred);
  std::vector<double> grad_probs = backward_to_probs(trace, grad_pred);
  const std::vector<double>& probs = trace.probs;

  std::vector<double> tmp(probs.size(), 0.0);
  out.parts.entropy = entropy_loss(probs, lw.epsilon, tmp);
  for (std::size_t t = 0; t < tmp.size(); ++t) grad_probs[t] += lw.lambda_E * tmp[t];

  const VariableUsage usage = variable_usage(probs, n, schema);
  VariableUsage g_range{usage.n, usage.num_vars, std::vector<double>(usage.counts.size(), 0.0)};
  VariableUsage g_conn = g_range;
  VariableUsage g_digit = g_range;
  out.parts.range = range_loss(usage, schema.head_vars(), lw.eta, &g_range);
  out.parts.connected = connected_loss(usage, schema.aux_vars(), lw.c1, lw.c2, &g_conn);
  out.parts.digitization = digitization_loss(usage, &g_digit);
  VariableUsage g_usage = g_range;
  for (std::size_t t = 0; t < g_usage.counts.size(); ++t) {
    g_usage.counts[t] = lw.lambda_R * g_range.counts[t] + lw.lambda_C * g_conn.counts[t] +
                        lw.lambda_D * g_digit.counts[t];
  }
  variable_usage_vjp(g_usage, schema, grad_probs);

  std::vector<double> grad_logits = probs_vjp(probs, grad_probs);
  std::vector<double> g_sim(w.size(), 0.0);
  out.parts.similarity = similarity_loss(w, g_sim);
  for (std::size_t t = 0; t < g_sim.size(); ++t) grad_logits[t] += lw.lambda_S * g_sim[t];

  for (double g : grad_logits) {
    if (!std::isfinite(g)) throw NumericError("objective: non-finite gradient");
  }
  out.value = total_loss(out.parts, lw);
  if (!std::isfinite(out.value)) throw NumericError("objective: non-finite loss");
  out.gradient = RuleWeights(n, w.m(), std::move(grad_logits));
  return out;
}

}  // namespace dilp

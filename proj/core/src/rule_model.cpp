#include "dilp/rule_model.hpp"

#include <cmath>
#include <tuple>
#include <utility>

#include "dilp/errors.hpp"

namespace dilp {

RuleWeights::RuleWeights(std::size_t n, std::size_t m) : RuleWeights(n, m, std::vector<double>(n * m * 3)) {}

RuleWeights::RuleWeights(std::size_t n, std::size_t m, std::vector<double> logits)
    : n_(n), m_(m), logits_(std::move(logits)) {
  if (n == 0 || m == 0) throw DomainError("RuleWeights: n and m must be at least 1");
  if (logits_.size() != n * m * 3) throw DomainError("RuleWeights: logit count must be n*m*3");
  for (double v : logits_) {
    if (!std::isfinite(v)) throw DomainError("RuleWeights: non-finite logit");
  }
}

RuleWeights RuleWeights::random(std::size_t n, std::size_t m, Rng& rng, double stddev) {
  std::vector<double> logits(n * m * 3);
  for (double& v : logits) v = stddev * rng.normal();
  return RuleWeights(n, m, std::move(logits));
}

Triple RuleWeights::triple(std::size_t i, std::size_t j) const {
  const double* p = logits_.data() + (i * m_ + j) * 3;
  return {p[0], p[1], p[2]};
}

void RuleWeights::set_triple(std::size_t i, std::size_t j, const Triple& w) {
  double* p = logits_.data() + (i * m_ + j) * 3;
  p[0] = w[0];
  p[1] = w[1];
  p[2] = w[2];
}

std::vector<double> subpredicate_probs(const RuleWeights& w) {
  std::vector<double> probs(w.size());
  for (std::size_t i = 0; i < w.n(); ++i) {
    for (std::size_t j = 0; j < w.m(); ++j) {
      const Triple p = softmax3(w.triple(i, j));
      std::copy(p.begin(), p.end(), probs.begin() + static_cast<std::ptrdiff_t>((i * w.m() + j) * 3));
    }
  }
  return probs;
}

std::vector<double> probs_vjp(std::span<const double> probs, std::span<const double> grad_probs) {
  std::vector<double> out(probs.size());
  for (std::size_t t = 0; t < probs.size(); t += 3) {
    const Triple g = softmax3_vjp({probs[t], probs[t + 1], probs[t + 2]},
                                  {grad_probs[t], grad_probs[t + 1], grad_probs[t + 2]});
    out[t] = g[0];
    out[t + 1] = g[1];
    out[t + 2] = g[2];
  }
  return out;
}

double soft_valuation(const Triple& probs, double b) {
  return prob_sum(probs[0] * b, probs[1] * (1.0 - b), probs[2]);
}

namespace {

double product(std::span<const double> v) {
  double acc = 1.0;
  for (double x : v) acc *= x;
  return acc;
}

// d(prod v)/dv_j = prod_{k != j} v_k, without dividing by v_j.
void product_vjp(std::span<const double> v, double upstream, std::span<double> grad) {
  double prefix = 1.0;
  std::vector<double> suffix(v.size() + 1, 1.0);
  for (std::size_t j = v.size(); j-- > 0;) suffix[j] = suffix[j + 1] * v[j];
  for (std::size_t j = 0; j < v.size(); ++j) {
    grad[j] += upstream * prefix * suffix[j + 1];
    prefix *= v[j];
  }
}

}  // namespace

namespace {

// One example through the network. The per-subrule buffers have n * m (soft,
// conj_w) or n (conj, sub, disj_w) entries; conj_w and disj_w are only
// written in attention mode. Returns the disjunction value and the prediction.
std::pair<double, double> forward_row(const double* b, const double* p, std::size_t n, std::size_t m,
                                      const NetworkParams& params, double* soft, double* conj_w, double* conj,
                                      double* sub, double* disj_w) {
  const bool attention = params.mode == OperatorMode::Attention;
  for (std::size_t i = 0; i < n; ++i) {
    double* s = soft + i * m;
    const double* pi = p + i * m * 3;
    for (std::size_t j = 0; j < m; ++j) s[j] = prob_sum(pi[3 * j] * b[j], pi[3 * j + 1] * (1.0 - b[j]), pi[3 * j + 2]);
    std::span<const double> row(s, m);
    conj[i] = attention ? attention_aggregate(row, params.beta, AggregateMode::Min, {conj_w + i * m, m}) : product(row);
    sub[i] = sharp_sigmoid(conj[i], params.lambda, params.gamma);
  }
  std::span<const double> heads(sub, n);
  double d;
  if (attention) {
    d = attention_aggregate(heads, params.beta, AggregateMode::Max, {disj_w, n});
  } else {
    double none = 1.0;
    for (double h : heads) none *= 1.0 - h;
    d = 1.0 - none;
  }
  return {d, sharp_sigmoid(d, params.lambda, params.gamma)};
}

}  // namespace

ForwardTrace forward(const RuleWeights& w, const Dataset& batch, const NetworkParams& params) {
  if (batch.empty()) throw DomainError("forward: empty batch");
  if (batch.m != w.m()) throw DomainError("forward: batch width does not match weights");

  const std::size_t n = w.n();
  const std::size_t m = w.m();
  const std::size_t bs = batch.size();
  const bool attention = params.mode == OperatorMode::Attention;

  ForwardTrace t;
  t.n = n;
  t.m = m;
  t.batch = bs;
  t.params = params;
  t.inputs = batch.values;
  t.probs = subpredicate_probs(w);
  t.soft.resize(bs * n * m);
  t.conj.resize(bs * n);
  t.subrule_out.resize(bs * n);
  t.disj.resize(bs);
  t.predictions.resize(bs);
  t.conj_weights.resize(attention ? bs * n * m : 0);
  t.disj_weights.resize(attention ? bs * n : 0);

  for (std::size_t e = 0; e < bs; ++e) {
    std::tie(t.disj[e], t.predictions[e]) =
        forward_row(t.inputs.data() + e * m, t.probs.data(), n, m, params, t.soft.data() + e * n * m,
                    attention ? t.conj_weights.data() + e * n * m : nullptr, t.conj.data() + e * n,
                    t.subrule_out.data() + e * n, attention ? t.disj_weights.data() + e * n : nullptr);
  }
  return t;
}

std::vector<double> predict(const RuleWeights& w, const Dataset& data, const NetworkParams& params) {
  if (data.empty()) return {};
  if (data.m != w.m()) throw DomainError("predict: data width does not match weights");
  const std::size_t n = w.n();
  const std::size_t m = w.m();
  const std::vector<double> probs = subpredicate_probs(w);
  std::vector<double> soft(n * m), conj_w(n * m), conj(n), sub(n), disj_w(n);
  std::vector<double> out(data.size());
  for (std::size_t e = 0; e < data.size(); ++e) {
    out[e] = forward_row(data.row(e).data(), probs.data(), n, m, params, soft.data(), conj_w.data(), conj.data(),
                         sub.data(), disj_w.data())
                 .second;
  }
  return out;
}

std::vector<double> backward_to_probs(ForwardTrace& t, std::span<const double> grad_predictions) {
  if (t.consumed) throw UsageError("backward: trace already consumed");
  if (grad_predictions.size() != t.batch) throw DomainError("backward: gradient size does not match batch");
  t.consumed = true;

  const std::size_t n = t.n;
  const std::size_t m = t.m;
  const NetworkParams& hp = t.params;
  const bool attention = hp.mode == OperatorMode::Attention;

  std::vector<double> grad_probs(n * m * 3, 0.0);
  std::vector<double> grad_heads(n);
  std::vector<double> grad_soft(m);

  for (std::size_t e = 0; e < t.batch; ++e) {
    const double g = grad_predictions[e];
    if (g == 0.0) continue;
    const double pe = t.predictions[e];
    const double grad_d = g * hp.lambda * pe * (1.0 - pe);

    std::span<const double> heads(t.subrule_out.data() + e * n, n);
    std::fill(grad_heads.begin(), grad_heads.end(), 0.0);
    if (attention) {
      attention_aggregate_vjp(heads, {t.disj_weights.data() + e * n, n}, t.disj[e], hp.beta,
                              AggregateMode::Max, grad_d, grad_heads);
    } else {
      std::vector<double> complement(n);
      for (std::size_t i = 0; i < n; ++i) complement[i] = 1.0 - heads[i];
      // D = 1 - prod(1 - h): dD/dh_i = prod_{k != i} (1 - h_k)
      product_vjp(complement, grad_d, grad_heads);
    }

    const double* b = t.inputs.data() + e * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = heads[i];
      const double grad_c = grad_heads[i] * hp.lambda * h * (1.0 - h);
      if (grad_c == 0.0) continue;
      std::span<const double> soft(t.soft.data() + (e * n + i) * m, m);
      std::fill(grad_soft.begin(), grad_soft.end(), 0.0);
      if (attention) {
        attention_aggregate_vjp(soft, {t.conj_weights.data() + (e * n + i) * m, m}, t.conj[e * n + i],
                                hp.beta, AggregateMode::Min, grad_c, grad_soft);
      } else {
        product_vjp(soft, grad_c, grad_soft);
      }
      const double* p = t.probs.data() + i * m * 3;
      double* gp = grad_probs.data() + i * m * 3;
      for (std::size_t j = 0; j < m; ++j) {
        const double x = p[3 * j] * b[j];
        const double y = p[3 * j + 1] * (1.0 - b[j]);
        const double z = p[3 * j + 2];
        const Triple d = prob_sum_grad(x, y, z);
        gp[3 * j] += grad_soft[j] * d[0] * b[j];
        gp[3 * j + 1] += grad_soft[j] * d[1] * (1.0 - b[j]);
        gp[3 * j + 2] += grad_soft[j] * d[2];
      }
    }
  }
  return grad_probs;
}

RuleWeights backward(ForwardTrace& t, std::span<const double> grad_predictions) {
  const auto grad_probs = backward_to_probs(t, grad_predictions);
  return RuleWeights(t.n, t.m, probs_vjp(t.probs, grad_probs));
}

}  // namespace dilp

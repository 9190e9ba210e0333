#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dilp/diffcore.hpp"
#include "dilp/random.hpp"
#include "dilp/schema.hpp"

namespace dilp {

/// Trainable logits, one triple (positive, negated, identity) per
/// (subrule, body atom) pair. Stored row-major as n x m x 3.
class RuleWeights {
 public:
  RuleWeights() = default;
  RuleWeights(std::size_t n, std::size_t m);
  RuleWeights(std::size_t n, std::size_t m, std::vector<double> logits);

  /// i.i.d. N(0, stddev^2) logits.
  static RuleWeights random(std::size_t n, std::size_t m, Rng& rng, double stddev = 0.1);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t size() const { return logits_.size(); }

  double& at(std::size_t i, std::size_t j, std::size_t k) { return logits_[(i * m_ + j) * 3 + k]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return logits_[(i * m_ + j) * 3 + k];
  }
  Triple triple(std::size_t i, std::size_t j) const;
  void set_triple(std::size_t i, std::size_t j, const Triple& w);

  /// Flattened logits of subrule i (length 3m).
  std::span<const double> subrule(std::size_t i) const { return {logits_.data() + i * m_ * 3, m_ * 3}; }

  std::span<double> data() { return logits_; }
  std::span<const double> data() const { return logits_; }

  bool operator==(const RuleWeights&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> logits_;
};

/// Softmax of every triple: n x m x 3 probabilities in the same layout as
/// the logits.
std::vector<double> subpredicate_probs(const RuleWeights& w);

/// dL/dlogits from dL/dprobs for the whole tensor.
std::vector<double> probs_vjp(std::span<const double> probs, std::span<const double> grad_probs);

/// Combined valuation of one body slot: prob_sum(p1 b, p2 (1 - b), p3).
double soft_valuation(const Triple& probs, double b);

enum class OperatorMode { Attention, Product };

struct NetworkParams {
  double beta = 20.0;
  double lambda = 10.0;
  double gamma = 0.5;
  OperatorMode mode = OperatorMode::Attention;
};

/// Every intermediate of one batched forward pass, laid out per example.
struct ForwardTrace {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t batch = 0;
  NetworkParams params;
  std::vector<double> inputs;         // batch x m
  std::vector<double> probs;          // n x m x 3, shared by the batch
  std::vector<double> soft;           // batch x n x m
  std::vector<double> conj_weights;   // batch x n x m (attention mode)
  std::vector<double> conj;           // batch x n
  std::vector<double> subrule_out;    // batch x n
  std::vector<double> disj_weights;   // batch x n (attention mode)
  std::vector<double> disj;           // batch
  std::vector<double> predictions;    // batch
  bool consumed = false;
};

/// Head probability for every row of `batch`. Throws DomainError on an empty
/// batch or a width mismatch with the weights.
ForwardTrace forward(const RuleWeights& w, const Dataset& batch, const NetworkParams& params);

/// Predictions only, no trace kept.
std::vector<double> predict(const RuleWeights& w, const Dataset& data, const NetworkParams& params);

/// Back-propagates dL/dpredictions to dL/dprobs (n x m x 3). Marks the trace
/// consumed; a second call throws UsageError.
std::vector<double> backward_to_probs(ForwardTrace& trace, std::span<const double> grad_predictions);

/// Full backward pass to the logits.
RuleWeights backward(ForwardTrace& trace, std::span<const double> grad_predictions);

}  // namespace dilp

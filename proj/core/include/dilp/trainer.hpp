#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dilp/losses.hpp"
#include "dilp/random.hpp"
#include "dilp/rule_model.hpp"
#include "dilp/schema.hpp"

namespace dilp {

/// Training hyperparameters.
struct TrainConfig {
  double learning_rate = 0.01;
  double lr_decay = 0.0001;  // per epoch: lr / (1 + lr_decay * epoch)
  double beta = 20.0;
  double lambda = 10.0;
  double gamma = 0.5;
  OperatorMode op_mode = OperatorMode::Attention;
  double eta = 0.1;
  double c1 = 1.0;
  double c2 = 12.5;
  std::size_t epochs = 500;
  std::size_t restarts = 3;
  std::size_t batch_size = 128;
  double accuracy_threshold = 0.95;
  bool early_stop = true;  // stop once score() >= accuracy_threshold after T/5 epochs
  bool balance = true;     // label-balanced batches; false draws rows uniformly
  double lambda_E_max = 0.1;
  double lambda_S_max = 0.2;
  double lambda_S_min = 0.0;
  double lambda_R_max = 1.0;
  double lambda_C_max = 5.0;
  double lambda_D_max = 0.001;
  double eta_prime = 0.4;
  double clip_norm = 1.0;
  double init_stddev = 0.1;
  std::uint64_t seed = 0;
  std::size_t n_max = 8;

  /// Throws DomainError naming the first invalid field.
  void validate() const;
  NetworkParams network() const { return {beta, lambda, gamma, op_mode}; }
  ScheduleConfig schedule() const;

  bool operator==(const TrainConfig&) const = default;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

/// One bias-corrected Adam update at step t >= 1 (beta1 0.9, beta2 0.999,
/// eps 1e-8). Throws NumericError on a non-finite gradient.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr, std::size_t t);

struct BalancedBatch {
  std::vector<std::size_t> rows;
  bool balanced = true;  // false when one label is absent
};

/// min(batch_size, N) rows with positive and negative counts differing by at
/// most one; a class smaller than its quota is resampled with replacement.
BalancedBatch balance_batch(const Dataset& data, std::size_t batch_size, Rng& rng);

/// min(batch_size, N) rows drawn without replacement, labels ignored.
BalancedBatch uniform_batch(const Dataset& data, std::size_t batch_size, Rng& rng);

/// Rescales `grads` in place to global L2 norm `max_norm` if it is larger.
/// Returns the norm before clipping.
double clip_gradients(std::span<double> grads, double max_norm);

/// Example accuracy with a row predicted positive when p >= 0.5.
double evaluate(const RuleWeights& w, const Dataset& data, const NetworkParams& params);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // mean objective over the epoch's batches
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double rule_accuracy = 0.0;  // validation accuracy of the rules extracted at eta_prime

  /// The smaller of val_accuracy and rule_accuracy.
  double score() const { return std::min(val_accuracy, rule_accuracy); }

  bool operator==(const EpochRecord&) const = default;
};

struct TrainReport {
  std::size_t subrules = 0;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> history;
  RuleWeights weights;
  bool early_stopped = false;
  double final_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double rule_accuracy = 0.0;
  double wall_seconds = 0.0;

  double score() const { return std::min(val_accuracy, rule_accuracy); }
};

/// Balanced mini-batch Adam on the scheduled objective for config.epochs
/// epochs of max(1, ceil(N / batch)) steps each. Stops once the score
/// reaches the accuracy threshold after at least a fifth of the epochs.
/// `val` may alias `train`.
TrainReport train_once(const TrainConfig& config, const PredicateSchema& schema, const Dataset& train,
                       const Dataset& val, std::size_t n, std::uint64_t seed, std::ostream* progress = nullptr);

struct RunSummary {
  std::size_t subrules = 0;
  std::size_t restart = 0;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  double final_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double rule_accuracy = 0.0;
};

struct SearchReport {
  TrainReport best;
  std::size_t selected_n = 0;
  std::size_t best_restart = 0;
  std::vector<RunSummary> runs;
  double wall_seconds = 0.0;
};

struct SearchOptions {
  std::size_t jobs = 1;  // restarts trained concurrently; results do not depend on it
  std::ostream* progress = nullptr;
};

/// Tries n = 1..config.n_max with config.restarts restarts each (seed + r).
/// Returns the smallest n whose best restart scores at least the accuracy
/// threshold, otherwise the best score overall, ties going to smaller n and
/// then lower final loss.
SearchReport search_rule_count(const TrainConfig& config, const PredicateSchema& schema, const Dataset& train,
                               const Dataset& val, const SearchOptions& options = {});

}  // namespace dilp

#include "dilp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_map>

#include "dilp/errors.hpp"
#include "dilp/extraction.hpp"

namespace dilp {

void TrainConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string("config: ") + name + " must be positive");
  };
  auto nonnegative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string("config: ") + name + " must be non-negative");
  };
  positive(learning_rate, "learning_rate");
  nonnegative(lr_decay, "lr_decay");
  positive(beta, "beta");
  positive(lambda, "lambda");
  if (!std::isfinite(gamma)) throw DomainError("config: gamma must be finite");
  nonnegative(eta, "eta");
  nonnegative(c1, "c1");
  positive(c2, "c2");
  if (epochs == 0) throw DomainError("config: epochs must be at least 1");
  if (restarts == 0) throw DomainError("config: restarts must be at least 1");
  if (batch_size == 0) throw DomainError("config: batch_size must be at least 1");
  if (!(accuracy_threshold > 0.0 && accuracy_threshold <= 1.0)) throw DomainError("config: accuracy_threshold must be in (0, 1]");
  nonnegative(lambda_E_max, "lambda_E_max");
  nonnegative(lambda_S_max, "lambda_S_max");
  nonnegative(lambda_S_min, "lambda_S_min");
  nonnegative(lambda_R_max, "lambda_R_max");
  nonnegative(lambda_C_max, "lambda_C_max");
  nonnegative(lambda_D_max, "lambda_D_max");
  if (!(eta_prime >= 0.0 && eta_prime <= std::log(3.0))) throw DomainError("config: eta_prime must be in [0, ln 3]");
  positive(clip_norm, "clip_norm");
  nonnegative(init_stddev, "init_stddev");
  if (n_max == 0) throw DomainError("config: n_max must be at least 1");
}

ScheduleConfig TrainConfig::schedule() const {
  return {lambda_E_max, lambda_S_max, lambda_S_min, lambda_R_max, lambda_C_max, lambda_D_max, epochs};
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr, std::size_t t) {
  constexpr double b1 = 0.9;
  constexpr double b2 = 0.999;
  constexpr double eps = 1e-8;
  if (params.size() != grads.size()) throw DomainError("adam_step: shape mismatch");
  if (t == 0) throw DomainError("adam_step: step index starts at 1");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw DomainError("adam_step: state shape mismatch");
  for (double g : grads) {
    if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient");
  }
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
    params[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + eps);
  }
}

namespace {

// Appends `count` draws from `pool`: without replacement while it lasts,
// then with replacement.
void draw(const std::vector<std::size_t>& pool, std::size_t count, Rng& rng, std::vector<std::size_t>& out) {
  if (count == 0) return;
  std::vector<std::size_t> scratch = pool;
  const std::size_t unique = std::min(count, scratch.size());
  for (std::size_t i = 0; i < unique; ++i) {
    std::swap(scratch[i], scratch[i + rng.below(scratch.size() - i)]);
    out.push_back(scratch[i]);
  }
  for (std::size_t i = unique; i < count; ++i) out.push_back(pool[rng.below(pool.size())]);
}

}  // namespace

BalancedBatch balance_batch(const Dataset& data, std::size_t batch_size, Rng& rng) {
  if (data.empty()) throw DomainError("balance_batch: empty dataset");
  if (batch_size == 0) throw DomainError("balance_batch: batch_size must be at least 1");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < data.size(); ++i) (data.labels[i] == 1 ? pos : neg).push_back(i);

  BalancedBatch out;
  const std::size_t size = std::min(batch_size, data.size());
  out.rows.reserve(size);
  if (pos.empty() || neg.empty()) {
    out.balanced = false;
    draw(pos.empty() ? neg : pos, size, rng, out.rows);
    return out;
  }
  const std::size_t npos = size / 2 + (size % 2 == 1 && rng.bernoulli(0.5) ? 1 : 0);
  draw(pos, npos, rng, out.rows);
  draw(neg, size - npos, rng, out.rows);
  return out;
}

BalancedBatch uniform_batch(const Dataset& data, std::size_t batch_size, Rng& rng) {
  if (data.empty()) throw DomainError("uniform_batch: empty dataset");
  if (batch_size == 0) throw DomainError("uniform_batch: batch_size must be at least 1");
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  BalancedBatch out;
  out.balanced = false;
  draw(all, std::min(batch_size, data.size()), rng, out.rows);
  return out;
}

double clip_gradients(std::span<double> grads, double max_norm) {
  if (!(max_norm > 0.0)) throw DomainError("clip_gradients: max_norm must be positive");
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

double evaluate(const RuleWeights& w, const Dataset& data, const NetworkParams& params) {
  if (data.empty()) return 0.0;
  const std::vector<double> p = predict(w, data, params);
  std::vector<int> fired(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) fired[i] = p[i] >= 0.5;
  return data.example_accuracy(fired);
}

namespace {

// The distinct valuation rows of a table and the distinct index of every row.
// Propositionalized tables repeat a handful of binary patterns many times.
struct DistinctRows {
  Dataset rows;
  std::vector<std::size_t> index;
};

DistinctRows distinct_rows(const Dataset& data) {
  DistinctRows out{Dataset(data.m), {}};
  std::unordered_map<std::string, std::size_t> seen;
  out.index.reserve(data.size());
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.row(r);
    std::string key(reinterpret_cast<const char*>(row.data()), row.size_bytes());
    const auto [it, fresh] = seen.try_emplace(std::move(key), out.rows.size());
    if (fresh) {
      out.rows.values.insert(out.rows.values.end(), row.begin(), row.end());
      out.rows.labels.push_back(0);
    }
    out.index.push_back(it->second);
  }
  return out;
}

double evaluate_distinct(const RuleWeights& w, const Dataset& data, const DistinctRows& distinct,
                         const NetworkParams& params) {
  const std::vector<double> p = predict(w, distinct.rows, params);
  std::vector<int> fired(data.size());
  for (std::size_t i = 0; i < fired.size(); ++i) fired[i] = p[distinct.index[i]] >= 0.5;
  return data.example_accuracy(fired);
}

}  // namespace

TrainReport train_once(const TrainConfig& config, const PredicateSchema& schema, const Dataset& train,
                       const Dataset& val, std::size_t n, std::uint64_t seed, std::ostream* progress) {
  config.validate();
  if (train.empty() || val.empty()) throw DomainError("train_once: empty dataset");
  if (train.m != schema.m() || val.m != schema.m()) throw DomainError("train_once: dataset width does not match the schema");
  if (n == 0) throw DomainError("train_once: at least one subrule is required");

  const auto start = std::chrono::steady_clock::now();
  Rng rng(seed);
  TrainReport report;
  report.subrules = n;
  report.seed = seed;
  report.weights = RuleWeights::random(n, schema.m(), rng, config.init_stddev);

  const NetworkParams net = config.network();
  const ScheduleConfig sched = config.schedule();
  const ScheduleShape shape{n, schema.head_vars().size(), schema.aux_vars().size()};
  const std::size_t steps = std::max<std::size_t>(1, (train.size() + config.batch_size - 1) / config.batch_size);
  const bool shared = &train == &val;
  const DistinctRows train_rows = distinct_rows(train);
  const DistinctRows val_rows = shared ? DistinctRows{} : distinct_rows(val);

  AdamState adam;
  std::size_t t = 0;
  std::vector<double> grad;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    LossWeights lw = schedule(epoch, sched, shape);
    lw.eta = config.eta;
    lw.c1 = config.c1;
    lw.c2 = config.c2;
    const double lr = config.learning_rate / (1.0 + config.lr_decay * static_cast<double>(epoch));

    double loss_sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const BalancedBatch batch = config.balance ? balance_batch(train, config.batch_size, rng) : uniform_batch(train, config.batch_size, rng);
      Objective obj = evaluate_objective(report.weights, train.subset(batch.rows), schema, net, lw);
      loss_sum += obj.value;
      grad.assign(obj.gradient.data().begin(), obj.gradient.data().end());
      clip_gradients(grad, config.clip_norm);
      adam_step(report.weights.data(), grad, adam, lr, ++t);
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.loss = loss_sum / static_cast<double>(steps);
    if (!std::isfinite(rec.loss)) throw NumericError("train_once: non-finite loss at epoch " + std::to_string(rec.epoch));
    rec.train_accuracy = evaluate_distinct(report.weights, train, train_rows, net);
    rec.val_accuracy = shared ? rec.train_accuracy : evaluate_distinct(report.weights, val, val_rows, net);
    rec.rule_accuracy = rule_accuracy(build_rules(identify_predicates(report.weights, config.eta_prime)), val);
    report.history.push_back(rec);
    if (progress) {
      *progress << "n=" << n << " seed=" << seed << " epoch=" << rec.epoch << " loss=" << rec.loss
                << " train_acc=" << rec.train_accuracy << " val_acc=" << rec.val_accuracy
                << " rule_acc=" << rec.rule_accuracy << '\n';
    }
    if (config.early_stop && rec.score() >= config.accuracy_threshold && rec.epoch * 5 >= config.epochs) {
      report.early_stopped = true;
      break;
    }
  }

  if (report.history.empty()) {
    report.train_accuracy = evaluate(report.weights, train, net);
    report.val_accuracy = shared ? report.train_accuracy : evaluate(report.weights, val, net);
    report.rule_accuracy = rule_accuracy(build_rules(identify_predicates(report.weights, config.eta_prime)), val);
  } else {
    const EpochRecord& last = report.history.back();
    report.final_loss = last.loss;
    report.train_accuracy = last.train_accuracy;
    report.val_accuracy = last.val_accuracy;
    report.rule_accuracy = last.rule_accuracy;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

// True if a should be preferred over b among restarts of one n.
bool better_restart(const TrainReport& a, const TrainReport& b) {
  if (a.score() != b.score()) return a.score() > b.score();
  return a.final_loss < b.final_loss;
}

}  // namespace

SearchReport search_rule_count(const TrainConfig& config, const PredicateSchema& schema, const Dataset& train,
                               const Dataset& val, const SearchOptions& options) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  SearchReport out;
  bool have_best = false;

  for (std::size_t n = 1; n <= config.n_max; ++n) {
    std::vector<TrainReport> runs(config.restarts);
    std::vector<std::exception_ptr> errors(config.restarts);
    const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, config.restarts);
    if (jobs == 1) {
      for (std::size_t r = 0; r < config.restarts; ++r) {
        runs[r] = train_once(config, schema, train, val, n, config.seed + r, options.progress);
      }
    } else {
      std::mutex next_mutex;
      std::size_t next = 0;
      auto worker = [&] {
        while (true) {
          std::size_t r;
          {
            std::lock_guard lock(next_mutex);
            if (next == config.restarts) return;
            r = next++;
          }
          try {
            runs[r] = train_once(config, schema, train, val, n, config.seed + r, nullptr);
          } catch (...) {
            errors[r] = std::current_exception();
          }
        }
      };
      std::vector<std::jthread> pool;
      for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
      pool.clear();
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    std::size_t best_r = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const TrainReport& rep = runs[r];
      out.runs.push_back({n, r, rep.seed, rep.history.size(), rep.final_loss, rep.train_accuracy, rep.val_accuracy,
                          rep.rule_accuracy});
      if (options.progress) {
        *options.progress << "search n=" << n << " restart=" << r << " epochs=" << rep.history.size()
                          << " loss=" << rep.final_loss << " val_acc=" << rep.val_accuracy
                          << " rule_acc=" << rep.rule_accuracy << '\n';
      }
      if (better_restart(rep, runs[best_r])) best_r = r;
    }

    TrainReport& cand = runs[best_r];
    const bool reached = cand.score() >= config.accuracy_threshold;
    // Equal accuracy keeps the smaller n; the first n to reach the threshold
    // is strictly better than every earlier one.
    if (!have_best || cand.score() > out.best.score()) {
      out.best = std::move(cand);
      out.selected_n = n;
      out.best_restart = best_r;
      have_best = true;
    }
    if (reached) break;
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace dilp

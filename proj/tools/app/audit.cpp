#include "audit.hpp"

#include <algorithm>

#include "dilp/diffcore.hpp"
#include "dilp/rule_model.hpp"

namespace dilp::app {

namespace {

std::vector<double> uniforms(Rng& rng, std::size_t count, double lo, double hi) {
  std::vector<double> out(count);
  for (double& v : out) v = rng.uniform(lo, hi);
  return out;
}

std::vector<double> normals(Rng& rng, std::size_t count, double scale = 1.0) {
  std::vector<double> out(count);
  for (double& v : out) v = scale * rng.normal();
  return out;
}

std::vector<double> to_vector(const VariableUsage& u) { return u.counts; }

VariableUsage usage_from(std::span<const double> x, std::size_t n, std::size_t k) {
  return {n, k, std::vector<double>(x.begin(), x.end())};
}

// A usage matrix away from the kinks at M = 1 (range) and M = 2 (connected).
std::vector<double> usage_point(Rng& rng, std::size_t count) {
  std::vector<double> out(count);
  for (double& v : out) {
    do {
      v = rng.uniform(0.0, 3.0);
    } while (std::abs(v - 1.0) < 1e-3 || std::abs(v - 2.0) < 1e-3);
  }
  return out;
}

class Auditor {
 public:
  Auditor(std::uint64_t seed, std::size_t points) : rng_(seed), points_(points) {}

  template <class Make>
  void check(const std::string& name, Make make, double h = 1e-6) {
    AuditRow row{name, points_, 0.0};
    for (std::size_t i = 0; i < points_; ++i) {
      auto [f, x] = make(rng_);
      const double err = grad_check(f, x, h).max_relative_error;
      if (!(err <= row.worst_relative_error)) row.worst_relative_error = err;
    }
    rows_.push_back(row);
  }

  void add(AuditRow row) { rows_.push_back(std::move(row)); }
  Rng& rng() { return rng_; }
  std::vector<AuditRow> rows() && { return std::move(rows_); }

 private:
  Rng rng_;
  std::size_t points_;
  std::vector<AuditRow> rows_;
};

using Case = std::pair<Differentiable, std::vector<double>>;

}  // namespace

ObjectiveInstance random_objective(Rng& rng, std::size_t batch) {
  const std::size_t n = 1 + rng.below(4);
  const std::size_t m = 2 + rng.below(8);
  const std::size_t vars = 3 + rng.below(2);
  // Atoms 0 and 1 pin the auxiliary variable X3 so both variable sets are non-empty.
  std::vector<Atom> body{{"p1", {0, 2}}, {"p2", {2, 1}}};
  for (std::size_t j = 2; j < m; ++j) {
    const std::size_t a = rng.below(vars);
    std::size_t b = rng.below(vars - 1);
    if (b >= a) ++b;
    body.push_back({"p" + std::to_string(j + 1), {a, b}});
  }
  ObjectiveInstance out{PredicateSchema({"h", {0, 1}}, std::move(body)), Dataset(m), RuleWeights(n, m), {}, {}};
  for (std::size_t r = 0; r < batch; ++r) {
    const auto row = uniforms(rng, m, 0.0, 1.0);
    out.batch.push_back(row, static_cast<int>(rng.below(2)));
  }
  out.weights = RuleWeights(n, m, normals(rng, n * m * 3));
  out.loss.lambda_E = rng.uniform(0.05, 1.0);
  out.loss.lambda_S = rng.uniform(0.05, 1.0);
  out.loss.lambda_R = rng.uniform(0.05, 1.0);
  out.loss.lambda_C = rng.uniform(0.05, 1.0);
  out.loss.lambda_D = rng.uniform(0.05, 1.0);
  return out;
}

double check_objective(const ObjectiveInstance& inst, double h) {
  const std::size_t n = inst.weights.n();
  const std::size_t m = inst.weights.m();
  auto at = [&](std::span<const double> x) {
    return evaluate_objective(RuleWeights(n, m, {x.begin(), x.end()}), inst.batch, inst.schema, inst.params, inst.loss);
  };
  const Differentiable f{[&](std::span<const double> x) { return at(x).value; },
                         [&](std::span<const double> x) {
                           const Objective o = at(x);
                           return std::vector<double>(o.gradient.data().begin(), o.gradient.data().end());
                         }};
  return grad_check(f, inst.weights.data(), h).max_relative_error;
}

std::vector<AuditRow> gradient_audit(std::uint64_t seed, std::size_t points) {
  Auditor a(seed, points);

  a.check("softmax3", [](Rng& rng) {
    const auto c = normals(rng, 3);
    Differentiable f{[c](std::span<const double> x) {
                       const Triple p = softmax3({x[0], x[1], x[2]});
                       return c[0] * p[0] + c[1] * p[1] + c[2] * p[2];
                     },
                     [c](std::span<const double> x) {
                       const Triple g = softmax3_vjp(softmax3({x[0], x[1], x[2]}), {c[0], c[1], c[2]});
                       return std::vector<double>(g.begin(), g.end());
                     }};
    return Case{f, normals(rng, 3, 2.0)};
  });

  a.check("prob_sum", [](Rng& rng) {
    Differentiable f{[](std::span<const double> x) { return prob_sum(x[0], x[1], x[2]); },
                     [](std::span<const double> x) {
                       const Triple g = prob_sum_grad(x[0], x[1], x[2]);
                       return std::vector<double>(g.begin(), g.end());
                     }};
    return Case{f, uniforms(rng, 3, 0.0, 1.0)};
  });

  for (const auto mode : {AggregateMode::Min, AggregateMode::Max}) {
    a.check(mode == AggregateMode::Min ? "attention_min" : "attention_max", [mode](Rng& rng) {
      Differentiable f{[mode](std::span<const double> x) { return attention_aggregate(x, 20.0, mode); },
                       [mode](std::span<const double> x) {
                         std::vector<double> w(x.size());
                         std::vector<double> g(x.size(), 0.0);
                         const double r = attention_aggregate(x, 20.0, mode, w);
                         attention_aggregate_vjp(x, w, r, 20.0, mode, 1.0, g);
                         return g;
                       }};
      return Case{f, uniforms(rng, 2 + rng.below(7), 0.0, 1.0)};
    });
  }

  a.check("sharp_sigmoid", [](Rng& rng) {
    Differentiable f{[](std::span<const double> x) { return sharp_sigmoid(x[0], x[1], x[2]); },
                     [](std::span<const double> x) {
                       const Triple g = sharp_sigmoid_grad(x[0], x[1], x[2]);
                       return std::vector<double>(g.begin(), g.end());
                     }};
    return Case{f, {rng.uniform(0.0, 1.0), rng.uniform(1.0, 20.0), rng.uniform(0.2, 0.8)}};
  });

  a.check("bce", [](Rng& rng) {
    const std::size_t size = 1 + rng.below(16);
    std::vector<int> labels(size);
    for (int& l : labels) l = static_cast<int>(rng.below(2));
    Differentiable f{[labels](std::span<const double> x) { return bce(x, labels); },
                     [labels](std::span<const double> x) {
                       std::vector<double> g(x.size(), 0.0);
                       bce(x, labels, g);
                       return g;
                     }};
    return Case{f, uniforms(rng, size, 0.01, 0.99)};
  });

  a.check("entropy", [](Rng& rng) {
    const std::size_t triples = 1 + rng.below(12);
    std::vector<double> probs;
    for (std::size_t t = 0; t < triples; ++t) {
      const Triple p = softmax3({rng.normal(), rng.normal(), rng.normal()});
      probs.insert(probs.end(), p.begin(), p.end());
    }
    Differentiable f{[](std::span<const double> x) { return entropy_loss(x, 1e-6); },
                     [](std::span<const double> x) {
                       std::vector<double> g(x.size(), 0.0);
                       entropy_loss(x, 1e-6, g);
                       return g;
                     }};
    return Case{f, probs};
  });

  a.check("similarity", [](Rng& rng) {
    const std::size_t n = 1 + rng.below(4);
    const std::size_t m = 1 + rng.below(9);
    Differentiable f{[n, m](std::span<const double> x) { return similarity_loss(RuleWeights(n, m, {x.begin(), x.end()})); },
                     [n, m](std::span<const double> x) {
                       std::vector<double> g(x.size(), 0.0);
                       similarity_loss(RuleWeights(n, m, {x.begin(), x.end()}), g);
                       return g;
                     }};
    return Case{f, normals(rng, n * m * 3)};
  });

  a.check("range", [](Rng& rng) {
    const std::size_t n = 1 + rng.below(4);
    const std::vector<std::size_t> head{0, 2};
    Differentiable f{[n, head](std::span<const double> x) { return range_loss(usage_from(x, n, 4), head, 0.1); },
                     [n, head](std::span<const double> x) {
                       VariableUsage g{n, 4, std::vector<double>(x.size(), 0.0)};
                       range_loss(usage_from(x, n, 4), head, 0.1, &g);
                       return to_vector(g);
                     }};
    return Case{f, usage_point(rng, n * 4)};
  });

  a.check("connected", [](Rng& rng) {
    const std::size_t n = 1 + rng.below(4);
    const std::vector<std::size_t> aux{1, 3};
    Differentiable f{[n, aux](std::span<const double> x) { return connected_loss(usage_from(x, n, 4), aux, 1.0, 12.5); },
                     [n, aux](std::span<const double> x) {
                       VariableUsage g{n, 4, std::vector<double>(x.size(), 0.0)};
                       connected_loss(usage_from(x, n, 4), aux, 1.0, 12.5, &g);
                       return to_vector(g);
                     }};
    return Case{f, usage_point(rng, n * 4)};
  });

  a.check("digitization", [](Rng& rng) {
    const std::size_t n = 1 + rng.below(4);
    Differentiable f{[n](std::span<const double> x) { return digitization_loss(usage_from(x, n, 3)); },
                     [n](std::span<const double> x) {
                       VariableUsage g{n, 3, std::vector<double>(x.size(), 0.0)};
                       digitization_loss(usage_from(x, n, 3), &g);
                       return to_vector(g);
                     }};
    return Case{f, usage_point(rng, n * 3)};
  });

  for (const auto mode : {OperatorMode::Attention, OperatorMode::Product}) {
    AuditRow row{mode == OperatorMode::Attention ? "objective" : "objective_product", points, 0.0};
    for (std::size_t i = 0; i < points; ++i) {
      ObjectiveInstance inst = random_objective(a.rng());
      inst.params.mode = mode;
      const double err = check_objective(inst);
      if (!(err <= row.worst_relative_error)) row.worst_relative_error = err;
    }
    a.add(row);
  }
  return std::move(a).rows();
}

}  // namespace dilp::app

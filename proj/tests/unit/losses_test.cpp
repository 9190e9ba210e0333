#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dilp/errors.hpp"
#include "dilp/losses.hpp"

namespace dilp {
namespace {

VariableUsage usage(std::size_t n, std::size_t k, std::vector<double> counts) { return {n, k, std::move(counts)}; }

TEST(Bce, Oracle) {
  const std::vector<double> p{0.9, 0.1};
  const std::vector<int> y{1, 0};
  std::vector<double> g(2, 0.0);
  EXPECT_NEAR(bce(p, y, g), 0.21072103131565256, 1e-12);
  EXPECT_NEAR(g[0], -1.0 / 0.9, 1e-12);
  EXPECT_NEAR(g[1], 1.0 / 0.9, 1e-12);
}

TEST(Bce, ClampsAndValidates) {
  const std::vector<double> p{0.0};
  const std::vector<int> y{1};
  EXPECT_TRUE(std::isfinite(bce(p, y)));
  EXPECT_NEAR(bce(p, y), -std::log(1e-12), 1e-6);
  const std::vector<int> bad{2};
  EXPECT_THROW(bce(p, bad), DomainError);
}

TEST(Entropy, Oracle) {
  const std::vector<double> p{0.97, 0.02, 0.01};
  EXPECT_NEAR(entropy_loss(p, 1e-6), 0.1538345933041224, 1e-9);
  const std::vector<double> uniform{1.0 / 3, 1.0 / 3, 1.0 / 3};
  EXPECT_NEAR(entropy_loss(uniform, 1e-6), 1.0986122886681098, 1e-5);
  const std::vector<double> one_hot{1.0, 0.0, 0.0};
  EXPECT_NEAR(entropy_loss(one_hot, 1e-6), 0.0, 1e-5);
}

TEST(Similarity, Oracle) {
  const RuleWeights w(2, 1, {1.0, 0.0, 2.0, 0.5, 1.0, -1.0});
  EXPECT_NEAR(similarity_loss(w), -0.14907119849998599, 1e-12);
  EXPECT_EQ(similarity_loss(RuleWeights(1, 3, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0})), 0.0);
}

TEST(Range, Values) {
  const std::vector<std::size_t> head{0};
  EXPECT_NEAR(range_loss(usage(1, 1, {0.5}), head, 0.1), 0.25, 1e-15);
  EXPECT_NEAR(range_loss(usage(1, 1, {1.0}), head, 0.1), 0.0, 1e-15);
  EXPECT_NEAR(range_loss(usage(1, 1, {3.0}), head, 0.1), 0.2, 1e-15);
}

TEST(Connected, Values) {
  const std::vector<std::size_t> aux{0};
  EXPECT_NEAR(connected_loss(usage(1, 1, {0.5}), aux, 1.0, 12.5), 0.04393693362340742, 1e-12);
  EXPECT_NEAR(connected_loss(usage(1, 1, {1.0}), aux, 1.0, 12.5), 1.0, 1e-15);
  EXPECT_NEAR(connected_loss(usage(1, 1, {2.0}), aux, 1.0, 12.5), 0.0, 1e-15);
  EXPECT_NEAR(connected_loss(usage(1, 1, {3.0}), aux, 1.0, 12.5), 1.0, 1e-15);
}

TEST(Digitization, Values) {
  EXPECT_NEAR(digitization_loss(usage(1, 1, {0.25})), 0.5, 1e-12);
  EXPECT_NEAR(digitization_loss(usage(1, 2, {1.0, 2.0})), 0.0, 1e-12);
  EXPECT_NEAR(digitization_loss(usage(1, 2, {0.5, 1.0})), 0.5, 1e-12);
  EXPECT_EQ(digitization_loss(usage(0, 0, {})), 0.0);
}

TEST(VariableUsage, CountsIncludedAtoms) {
  const PredicateSchema s({"h", {0, 1}}, {{"p", {0, 2}}, {"q", {2, 1}}, {"r", {0, 1}}});
  // subrule 0: atoms 0 and 1 fully included, atom 2 excluded
  const std::vector<double> probs{1, 0, 0, 0, 1, 0, 0, 0, 1};
  const VariableUsage u = variable_usage(probs, 1, s);
  EXPECT_EQ(u.counts, (std::vector<double>{1.0, 1.0, 2.0}));
  EXPECT_THROW(variable_usage(std::vector<double>(3), 1, s), DomainError);
}

TEST(Schedule, EndpointsAndMidpoint) {
  ScheduleConfig cfg;
  cfg.total_epochs = 100;
  const ScheduleShape shape{2, 2, 1};
  const LossWeights w0 = schedule(0, cfg, shape);
  EXPECT_EQ(w0.lambda_E, 0.0);
  EXPECT_EQ(w0.lambda_S, 0.2);
  EXPECT_EQ(w0.lambda_R, 0.0);
  const LossWeights w1 = schedule(100, cfg, shape);
  EXPECT_NEAR(w1.lambda_E, 0.1, 1e-15);
  EXPECT_NEAR(w1.lambda_S, 0.0, 1e-15);
  EXPECT_NEAR(w1.lambda_R, 1.0 / 4.0, 1e-15);
  EXPECT_NEAR(w1.lambda_C, 5.0 / 2.0, 1e-15);
  EXPECT_NEAR(w1.lambda_D, 0.001, 1e-15);
  const LossWeights half = schedule(50, cfg, shape);
  EXPECT_NEAR(half.lambda_E, 0.05, 1e-15);
  EXPECT_NEAR(half.lambda_S, 0.15, 1e-15);
  EXPECT_NEAR(half.lambda_C, 0.625, 1e-15);
  EXPECT_THROW(schedule(101, cfg, shape), DomainError);
  EXPECT_EQ(schedule(100, cfg, {1, 0, 0}).lambda_C, 0.0);
}

TEST(TotalLoss, WeightedSum) {
  LossParts parts{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  LossWeights w;
  w.lambda_E = 0.1;
  w.lambda_S = 0.2;
  w.lambda_R = 0.3;
  w.lambda_C = 0.4;
  w.lambda_D = 0.5;
  EXPECT_NEAR(total_loss(parts, w), 1.0 + 0.2 + 0.6 + 1.2 + 2.0 + 3.0, 1e-12);
}

TEST(Objective, ValueMatchesParts) {
  const PredicateSchema s({"h", {0, 1}}, {{"p", {0, 2}}, {"q", {2, 1}}});
  Dataset d(2);
  d.push_back(std::vector<double>{0.8, 0.3}, 1);
  d.push_back(std::vector<double>{0.1, 0.9}, 0);
  Rng rng(4);
  const RuleWeights w = RuleWeights::random(2, 2, rng, 1.0);
  LossWeights lw;
  lw.lambda_E = 0.3;
  lw.lambda_S = 0.2;
  lw.lambda_R = 0.1;
  lw.lambda_C = 0.7;
  lw.lambda_D = 0.05;
  const Objective o = evaluate_objective(w, d, s, {}, lw);
  EXPECT_NEAR(o.value, total_loss(o.parts, lw), 1e-12);
  EXPECT_NEAR(o.parts.bce, bce(o.predictions, d.labels), 1e-12);
  EXPECT_NEAR(o.parts.similarity, similarity_loss(w), 1e-12);
}

TEST(Objective, GradientAtRandomPoints) {
  Rng rng(31);
  const PredicateSchema s({"h", {0, 1}}, {{"p", {0, 2}}, {"q", {2, 1}}, {"r", {0, 1}}, {"t", {1, 2}}});
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(3);
    Dataset d(4);
    for (int r = 0; r < 6; ++r) {
      std::vector<double> row(4);
      for (double& v : row) v = rng.uniform();
      d.push_back(row, r % 2);
    }
    LossWeights lw;
    lw.lambda_E = rng.uniform(0.05, 1.0);
    lw.lambda_S = rng.uniform(0.05, 1.0);
    lw.lambda_R = rng.uniform(0.05, 1.0);
    lw.lambda_C = rng.uniform(0.05, 1.0);
    lw.lambda_D = rng.uniform(0.05, 1.0);
    NetworkParams p;
    p.mode = trial % 2 ? OperatorMode::Product : OperatorMode::Attention;
    const RuleWeights w0 = RuleWeights::random(n, 4, rng, 1.0);
    auto at = [&](std::span<const double> x) {
      return evaluate_objective(RuleWeights(n, 4, {x.begin(), x.end()}), d, s, p, lw);
    };
    const Differentiable f{[&](std::span<const double> x) { return at(x).value; },
                           [&](std::span<const double> x) {
                             const Objective o = at(x);
                             return std::vector<double>(o.gradient.data().begin(), o.gradient.data().end());
                           }};
    EXPECT_LT(grad_check(f, w0.data(), 1e-6).max_relative_error, 1e-4);
  }
}

}  // namespace
}  // namespace dilp

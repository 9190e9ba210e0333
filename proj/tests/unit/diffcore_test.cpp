#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "dilp/diffcore.hpp"
#include "dilp/errors.hpp"
#include "dilp/random.hpp"

namespace dilp {
namespace {

TEST(Softmax3, MatchesReference) {
  const Triple p = softmax3({1.0, 2.0, 3.0});
  EXPECT_NEAR(p[0], 0.09003057317038046, 1e-15);
  EXPECT_NEAR(p[1], 0.24472847105479764, 1e-15);
  EXPECT_NEAR(p[2], 0.6652409557748218, 1e-15);
}

TEST(Softmax3, StableForLargeLogits) {
  const Triple p = softmax3({1000.0, 1000.0, -1000.0});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Softmax3, RejectsNonFinite) {
  EXPECT_THROW(softmax3({std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0}), DomainError);
  EXPECT_THROW(softmax3({std::numeric_limits<double>::infinity(), 0.0, 0.0}), DomainError);
}

TEST(ProbSum, Examples) {
  EXPECT_DOUBLE_EQ(prob_sum(0.0, 0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(prob_sum(1.0, 0.3, 0.2), 1.0);
  EXPECT_NEAR(prob_sum(0.5, 0.5, 0.5), 0.875, 1e-15);
}

TEST(ProbSum, BoundedByInputsAndOne) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(), y = rng.uniform(), z = rng.uniform();
    const double s = prob_sum(x, y, z);
    EXPECT_GE(s, std::max({x, y, z}) - 1e-15);
    EXPECT_LE(s, 1.0);
    EXPECT_LE(s, std::min(1.0, x + y + z) + 1e-15);
  }
}

TEST(Attention, SoftminOracle) {
  const std::vector<double> b{0.05, 0.06};
  EXPECT_NEAR(attention_aggregate(b, 20.0, AggregateMode::Min), 0.05450166002687522, 1e-12);
}

TEST(Attention, SoftmaxOracle) {
  const std::vector<double> b{0.2, 0.9, 0.4};
  EXPECT_NEAR(attention_aggregate(b, 20.0, AggregateMode::Max), 0.8999767190413279, 1e-12);
}

TEST(Attention, ConstantVectorIsFixedPoint) {
  const std::vector<double> b{0.7, 0.7, 0.7};
  EXPECT_NEAR(attention_aggregate(b, 20.0, AggregateMode::Min), 0.7, 1e-15);
  EXPECT_NEAR(attention_aggregate(b, 20.0, AggregateMode::Max), 0.7, 1e-15);
}

TEST(Attention, WeightsSumToOne) {
  const std::vector<double> b{0.1, 0.5, 0.3, 0.9};
  std::vector<double> w(b.size());
  attention_aggregate(b, 5.0, AggregateMode::Min, w);
  double total = 0.0;
  for (double v : w) total += v;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_GT(w[0], w[3]);
}

TEST(Attention, StaysInsideRange) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> b(2 + rng.below(7));
    for (double& v : b) v = rng.uniform();
    const auto [lo, hi] = std::minmax_element(b.begin(), b.end());
    for (const auto mode : {AggregateMode::Min, AggregateMode::Max}) {
      const double a = attention_aggregate(b, 20.0, mode);
      EXPECT_GE(a, *lo - 1e-12);
      EXPECT_LE(a, *hi + 1e-12);
    }
  }
}

TEST(Attention, ConvergesToExtremeAsBetaGrows) {
  const std::vector<double> b{0.3, 0.6, 0.45};
  double previous = 1.0;
  for (double beta : {1.0, 5.0, 20.0, 100.0}) {
    const double err = attention_aggregate(b, beta, AggregateMode::Min) - 0.3;
    EXPECT_LT(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 1e-6);
}

TEST(Attention, RejectsBadInput) {
  const std::vector<double> none;
  const std::vector<double> one{0.5};
  EXPECT_THROW(attention_aggregate(none, 20.0, AggregateMode::Min), DomainError);
  EXPECT_THROW(attention_aggregate(one, 0.0, AggregateMode::Min), DomainError);
  EXPECT_THROW(attention_aggregate(one, -1.0, AggregateMode::Max), DomainError);
}

TEST(SharpSigmoid, Examples) {
  EXPECT_DOUBLE_EQ(sharp_sigmoid(0.5, 10.0, 0.5), 0.5);
  EXPECT_NEAR(sharp_sigmoid(0.7, 10.0, 0.5), 0.8807970779778823, 1e-15);
  EXPECT_NEAR(sharp_sigmoid(0.3, 10.0, 0.5), 1.0 - 0.8807970779778823, 1e-15);
  EXPECT_EQ(sharp_sigmoid(-1e6, 10.0, 0.5), 0.0);
  EXPECT_EQ(sharp_sigmoid(1e6, 10.0, 0.5), 1.0);
}

TEST(GradCheck, RandomPointsForEveryPrimitive) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const Triple c{rng.normal(), rng.normal(), rng.normal()};
    const Differentiable softmax{[c](std::span<const double> x) {
                                   const Triple p = softmax3({x[0], x[1], x[2]});
                                   return c[0] * p[0] + c[1] * p[1] + c[2] * p[2];
                                 },
                                 [c](std::span<const double> x) {
                                   const Triple g = softmax3_vjp(softmax3({x[0], x[1], x[2]}), c);
                                   return std::vector<double>(g.begin(), g.end());
                                 }};
    const std::vector<double> logits{2 * rng.normal(), 2 * rng.normal(), 2 * rng.normal()};
    EXPECT_LT(grad_check(softmax, logits).max_relative_error, 1e-6);

    const Differentiable ps{[](std::span<const double> x) { return prob_sum(x[0], x[1], x[2]); },
                            [](std::span<const double> x) {
                              const Triple g = prob_sum_grad(x[0], x[1], x[2]);
                              return std::vector<double>(g.begin(), g.end());
                            }};
    const std::vector<double> unit{rng.uniform(), rng.uniform(), rng.uniform()};
    EXPECT_LT(grad_check(ps, unit).max_relative_error, 1e-6);

    const Differentiable sig{[](std::span<const double> x) { return sharp_sigmoid(x[0], x[1], x[2]); },
                             [](std::span<const double> x) {
                               const Triple g = sharp_sigmoid_grad(x[0], x[1], x[2]);
                               return std::vector<double>(g.begin(), g.end());
                             }};
    const std::vector<double> s{rng.uniform(), rng.uniform(1.0, 20.0), rng.uniform(0.2, 0.8)};
    EXPECT_LT(grad_check(sig, s, 1e-6).max_relative_error, 1e-5);

    for (const auto mode : {AggregateMode::Min, AggregateMode::Max}) {
      const Differentiable att{[mode](std::span<const double> x) { return attention_aggregate(x, 20.0, mode); },
                               [mode](std::span<const double> x) {
                                 std::vector<double> w(x.size()), g(x.size(), 0.0);
                                 const double r = attention_aggregate(x, 20.0, mode, w);
                                 attention_aggregate_vjp(x, w, r, 20.0, mode, 1.0, g);
                                 return g;
                               }};
      std::vector<double> v(2 + rng.below(7));
      for (double& e : v) e = rng.uniform();
      EXPECT_LT(grad_check(att, v, 1e-6).max_relative_error, 1e-5);
    }
  }
}

TEST(GradCheck, ReportsWorstCoordinate) {
  const Differentiable wrong{[](std::span<const double> x) { return x[0] * x[0] + 3.0 * x[1]; },
                             [](std::span<const double> x) { return std::vector<double>{2.0 * x[0], 1.0}; }};
  const std::vector<double> at{0.4, 0.2};
  const GradCheckResult r = grad_check(wrong, at);
  EXPECT_EQ(r.worst_index, 1u);
  EXPECT_NEAR(r.max_relative_error, 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(r.numeric[0], 0.8, 1e-8);
}

}  // namespace
}  // namespace dilp

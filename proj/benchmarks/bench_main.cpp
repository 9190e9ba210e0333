#include <benchmark/benchmark.h>

#include <vector>

#include "dilp/datasets.hpp"
#include "dilp/losses.hpp"
#include "dilp/operator_bench.hpp"
#include "dilp/rule_model.hpp"
#include "dilp/tasks.hpp"
#include "dilp/trainer.hpp"

namespace {

using namespace dilp;

Dataset table(std::size_t m, std::size_t rows) {
  const RuleAst ast{{{{0, false}, {1, true}}}};
  return gen_synthetic(m, rows, ast, 0.0, 1);
}

void BM_Forward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset d = table(9, 128);
  Rng rng(1);
  const RuleWeights w = RuleWeights::random(n, 9, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward(w, d, {}));
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(4)->Arg(8);

void BM_ForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset d = table(9, 128);
  Rng rng(1);
  const RuleWeights w = RuleWeights::random(n, 9, rng);
  const std::vector<double> up(128, 1.0);
  for (auto _ : state) {
    ForwardTrace t = forward(w, d, {});
    benchmark::DoNotOptimize(backward(t, up));
  }
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_ForwardBackward)->Arg(1)->Arg(4)->Arg(8);

void BM_Predict(benchmark::State& state) {
  const Dataset d = table(9, 1000);
  Rng rng(1);
  const RuleWeights w = RuleWeights::random(4, 9, rng);
  for (auto _ : state) benchmark::DoNotOptimize(predict(w, d, {}));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Predict);

void BM_Objective(benchmark::State& state) {
  const BuiltinRule r = builtin_rule("grandparent6");
  const Dataset d = gen_synthetic(r.m, 128, r.ast, 0.0, 1);
  Rng rng(1);
  const RuleWeights w = RuleWeights::random(4, r.m, rng);
  LossWeights lw;
  lw.lambda_E = lw.lambda_S = lw.lambda_R = lw.lambda_C = lw.lambda_D = 0.5;
  NetworkParams p;
  p.mode = state.range(0) ? OperatorMode::Product : OperatorMode::Attention;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_objective(w, d, r.schema, p, lw));
}
BENCHMARK(BM_Objective)->Arg(0)->Arg(1);

void BM_Conjunction(benchmark::State& state) {
  Rng rng(2);
  std::vector<double> b(static_cast<std::size_t>(state.range(0)));
  for (double& v : b) v = rng.uniform(0.05, 0.95);
  for (auto _ : state) benchmark::DoNotOptimize(conjunction_operators(b, 20.0));
}
BENCHMARK(BM_Conjunction)->Arg(2)->Arg(8);

void BM_Attention(benchmark::State& state) {
  Rng rng(2);
  std::vector<double> b(static_cast<std::size_t>(state.range(0)));
  for (double& v : b) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(attention_aggregate(b, 20.0, AggregateMode::Min));
}
BENCHMARK(BM_Attention)->Arg(2)->Arg(9)->Arg(64);

void BM_Propositionalize(benchmark::State& state) {
  const Task t = builtin_task("grandparent");
  for (auto _ : state) benchmark::DoNotOptimize(propositionalize(t.facts, t.schema));
}
BENCHMARK(BM_Propositionalize);

void BM_TrainEpochs(benchmark::State& state) {
  const BuiltinRule r = builtin_rule("F2");
  const Dataset d = gen_synthetic(r.m, 100, r.ast, 0.0, 1);
  TrainConfig c;
  c.epochs = 20;
  c.early_stop = false;
  for (auto _ : state) benchmark::DoNotOptimize(train_once(c, r.schema, d, d, 2, 0));
}
BENCHMARK(BM_TrainEpochs)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

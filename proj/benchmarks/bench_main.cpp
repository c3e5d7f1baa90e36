#include <benchmark/benchmark.h>

#include "generate.hpp"
#include "lipsum/dp_norm.hpp"
#include "lipsum/form_norm.hpp"
#include "lipsum/hilbert_schmidt.hpp"
#include "lipsum/random.hpp"
#include "lipsum/summing.hpp"

using namespace lipsum;

namespace {

std::vector<std::size_t> cube(std::size_t arity, std::size_t d) { return std::vector<std::size_t>(arity, d); }

void BM_Philox(benchmark::State& state) {
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(rng.next_u32());
}
BENCHMARK(BM_Philox);

void BM_EvalOperator(benchmark::State& state) {
  Rng rng(2);
  const auto dims = cube(3, static_cast<std::size_t>(state.range(0)));
  const auto T = gen::random_operator(rng, dims, 4);
  const auto x = gen::random_point(rng, dims, gen::l2_norms(3));
  for (auto _ : state) benchmark::DoNotOptimize(eval_operator(T, x));
}
BENCHMARK(BM_EvalOperator)->Arg(2)->Arg(4)->Arg(8);

void BM_OperatorNorm(benchmark::State& state) {
  Rng rng(3);
  const auto dims = cube(static_cast<std::size_t>(state.range(0)), 3);
  const auto T = gen::random_operator(rng, dims, 2);
  for (auto _ : state) benchmark::DoNotOptimize(operator_norm(T).report);
}
BENCHMARK(BM_OperatorNorm)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ConfigDenominator(benchmark::State& state) {
  Rng rng(4);
  const auto norms = gen::l2_norms(2);
  const auto cfg = gen::random_configuration(rng, {3, 3}, norms, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(config_denominator(cfg, 2.0, Ball::Operator, norms).report);
}
BENCHMARK(BM_ConfigDenominator)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_PietschLp(benchmark::State& state) {
  Rng rng(5);
  const auto T = gen::random_operator(rng, {2, 2}, 2);
  const auto r = estimate_pi_lip(T, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pietsch_upper_lp(T, r.certificate.pairset, r.certificate.forms, 2.0).constant);
  }
  state.counters["pairs"] = static_cast<double>(r.certificate.pairset.size());
  state.counters["forms"] = static_cast<double>(r.certificate.forms.size());
}
BENCHMARK(BM_PietschLp)->Unit(benchmark::kMillisecond);

void BM_EstimatePiLip(benchmark::State& state) {
  Rng rng(6);
  const auto T = gen::random_operator(rng, cube(static_cast<std::size_t>(state.range(0)), 2), 2);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_pi_lip(T, 2.0).certificate.constant);
}
BENCHMARK(BM_EstimatePiLip)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_VerifySandwich(benchmark::State& state) {
  Rng rng(7);
  const auto T = gen::random_operator(rng, {2, 2}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(verify_sandwich(T, 2.0).ratio);
}
BENCHMARK(BM_VerifySandwich)->Unit(benchmark::kMillisecond);

void BM_DpUpper(benchmark::State& state) {
  Rng rng(8);
  const auto z = gen::random_mixed(rng, {2, 2}, 2, NormSpec{gen::l2_norms(2), NormKind::L2});
  for (auto _ : state) benchmark::DoNotOptimize(dp_upper(z, 2.0).report);
}
BENCHMARK(BM_DpUpper)->Unit(benchmark::kMillisecond);

void BM_DpLowerDual(benchmark::State& state) {
  Rng rng(9);
  const auto z = gen::random_mixed(rng, {2, 2}, 2, NormSpec{gen::l2_norms(2), NormKind::L2});
  for (auto _ : state) benchmark::DoNotOptimize(dp_lower_dual(z, 2.0, dual_witnesses(z, 2.0)));
}
BENCHMARK(BM_DpLowerDual)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

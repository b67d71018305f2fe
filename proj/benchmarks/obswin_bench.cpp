#include <benchmark/benchmark.h>

#include "obswin/example_cases.hpp"
#include "obswin/expr.hpp"
#include "obswin/kfun.hpp"
#include "obswin/observability.hpp"
#include "obswin/odeint.hpp"

namespace {

using namespace obswin;

void BM_ParseDifferentiate(benchmark::State& state) {
  const std::string src = "exp(-1/(x1 - M)) * sin(x2)^2 + x1^3 * x2";
  const ParamSet params{"M"};
  for (auto _ : state) {
    const Expr e = parse_expr(src, 2, params);
    benchmark::DoNotOptimize(simplify(differentiate(e, 0)));
  }
}
BENCHMARK(BM_ParseDifferentiate);

void BM_Integrate(benchmark::State& state) {
  const SystemSpec s = load_example("double-integrator").spec;
  const Vector x0 = (Vector(2) << 0.3, -0.7).finished();
  const double T = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrate(s, x0, T));
}
BENCHMARK(BM_Integrate)->Arg(1)->Arg(10);

void BM_IntegralEta(benchmark::State& state) {
  const SystemSpec s = load_example("example2-kink").spec;
  const Vector a = Vector::Constant(1, 0.05), b = Vector::Constant(1, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(integral_eta(s, a, b, 2.0));
}
BENCHMARK(BM_IntegralEta);

void BM_RankReport(benchmark::State& state) {
  const SystemSpec s = load_example("example1").spec;
  SamplingPlan plan;
  plan.points_per_axis = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rank_report(s, 3, plan));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankReport)->Arg(101)->Arg(1001);

void BM_MinimizePair(benchmark::State& state) {
  const SystemSpec s = load_example("linear-contraction").spec;
  MinimizeOptions opts;
  opts.starts = static_cast<std::size_t>(state.range(0));
  opts.jobs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(minimize_pair(s, 0.5, 1.0, opts));
}
BENCHMARK(BM_MinimizePair)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

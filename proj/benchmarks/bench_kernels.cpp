#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ucadmm/admm.hpp"
#include "ucadmm/kernels.hpp"

using namespace ucadmm;

namespace {

ScheduleProblem case9(int T) {
  const auto grid = load_matpower(std::string(UCADMM_BENCH_DATA_DIR) + "/case9.m");
  return build_problem(grid, default_profile(T));
}

// Engine state after a few sweeps, so kernels see non-trivial targets.
struct Warm {
  ScheduleProblem problem;
  AdmmEngine engine;
  explicit Warm(int T) : problem(case9(T)), engine(problem, AdmmOptions{}) {
    engine.initialize(Table2<std::uint8_t>(problem.periods(), problem.grid.generators().size(), 1));
    for (int k = 0; k < 5; ++k) engine.sweep();
  }
  KernelContext ctx() const {
    const auto& st = engine.state();
    return {engine.problem(), engine.layout(), engine.options().rho, st.y, st.z};
  }
};

}  // namespace

static void BM_GenKernel(benchmark::State& state) {
  Warm w(4);
  const auto ctx = w.ctx();
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gen_kernel(ctx, w.engine.state().v, k % 4, k % 3, w.engine.options().gen_tron));
    ++k;
  }
}
BENCHMARK(BM_GenKernel);

static void BM_LineKernel(benchmark::State& state) {
  Warm w(4);
  const auto ctx = w.ctx();
  const auto& L = w.engine.layout();
  const auto& v = w.engine.state().v;
  std::size_t k = 0;
  for (auto _ : state) {
    const std::size_t t = k % 4, l = k % 9;
    const auto lp = line_problem(ctx, v, t, l, 0.0, 0.0);
    std::array<double, line_slot::COUNT> x0{};
    for (int s = 0; s < line_slot::COUNT; ++s) x0[static_cast<std::size_t>(s)] = v.line[L.line_index(t, l, s)];
    benchmark::DoNotOptimize(solve_line(lp, x0));
    ++k;
  }
}
BENCHMARK(BM_LineKernel);

static void BM_BusKernel(benchmark::State& state) {
  Warm w(4);
  const auto ctx = w.ctx();
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bus_kernel(ctx, w.engine.state().v, k % 4, k % 9));
    ++k;
  }
}
BENCHMARK(BM_BusKernel);

static void BM_UcBarKernel(benchmark::State& state) {
  Warm w(24);
  const auto ctx = w.ctx();
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ucbar_kernel(ctx, w.engine.state().v, k % 3, w.engine.options().ucbar_tol));
    ++k;
  }
}
BENCHMARK(BM_UcBarKernel);

// One full inner iteration on case9, T=24, by worker count.
static void BM_Sweep(benchmark::State& state) {
  const auto problem = case9(24);
  AdmmOptions o;
  o.workers = static_cast<std::size_t>(state.range(0));
  AdmmEngine eng(problem, o);
  eng.initialize(Table2<std::uint8_t>(24, 3, 1));
  for (auto _ : state) benchmark::DoNotOptimize(eng.sweep());
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

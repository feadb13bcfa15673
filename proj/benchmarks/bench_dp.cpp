#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ucadmm/uc_dp.hpp"

using namespace ucadmm;

namespace {

struct Instance {
  StageCost costs;
  UcParams params;
};

std::vector<Instance> make_instances(std::size_t n, int T) {
  std::mt19937_64 rng(42 + static_cast<unsigned>(T));
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> W(1, 8), coin(0, 1);
  std::vector<Instance> out;
  for (std::size_t k = 0; k < n; ++k) {
    Instance inst{StageCost(static_cast<std::size_t>(T)), UcParams{}};
    for (auto& tab : inst.costs.table) {
      for (auto& row : tab) {
        for (auto& x : row) x = U(rng);
      }
    }
    inst.params.min_up = std::min(T, W(rng));
    inst.params.min_down = std::min(T, W(rng));
    inst.params.initial_on = coin(rng) == 1;
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

// 1000 generators per iteration; time should grow linearly in T.
static void BM_DpSolveBatch(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const auto inst = make_instances(1000, T);
  for (auto _ : state) {
    double sink = 0.0;
    for (const auto& i : inst) sink += dp_solve(i.costs, i.params).cost;
    benchmark::DoNotOptimize(sink);
  }
  state.SetComplexityN(T);
  state.counters["generators"] = 1000;
}
BENCHMARK(BM_DpSolveBatch)->RangeMultiplier(2)->Range(24, 192)->Complexity(benchmark::oN)->Unit(benchmark::kMillisecond);

static void BM_DpTable(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const auto inst = make_instances(1, T);
  for (auto _ : state) benchmark::DoNotOptimize(dp_table(inst[0].costs, inst[0].params));
}
BENCHMARK(BM_DpTable)->Arg(24)->Arg(96);

// Serial reference vs OpenMP kernels: forest fit, batched prediction + EI,
// and grid cells.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tiersim/harness/commands.hpp"
#include "tiersim/sim/profiles.hpp"
#include "tiersim/tuner/acquisition.hpp"
#include "tiersim/tuner/forest.hpp"

using namespace tiersim;

namespace {

struct Data {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
};

Data make_data(std::size_t n, std::size_t dims) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(dims);
    for (auto& v : row) v = u(rng);
    d.y.push_back((row[0] - 0.3) * (row[0] - 0.3) + 0.5 * row[1] + 0.05 * u(rng));
    d.x.push_back(std::move(row));
  }
  return d;
}

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_ForestFit(benchmark::State& state) {
  const Data d = make_data(100, 10);
  for (auto _ : state) {
    RandomForest f;
    f.fit(d.x, d.y, 1, exec_of(state));
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_ForestFit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ScoreCandidates(benchmark::State& state) {
  const Data d = make_data(100, 10);
  const Data cand = make_data(5000, 10);
  RandomForest f;
  f.fit(d.x, d.y, 1);
  for (auto _ : state) {
    const auto p = f.predict(cand.x, exec_of(state));
    benchmark::DoNotOptimize(expected_improvement(p, 0.1, exec_of(state)));
  }
}
BENCHMARK(BM_ScoreCandidates)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Grid(benchmark::State& state) {
  ExperimentSpec spec;
  spec.profile = pmem_large();
  spec.workload = WorkloadSpec::defaults(WorkloadKind::MovingHotset);
  spec.workload.rss_pages = 4096;
  spec.workload.total_accesses = 200'000;
  spec.record_weight = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid(spec, "read_hot_threshold", "cooling_threshold", {1, 4, 8, 16}, {10, 18, 26, 40},
                                  exec_of(state)));
  }
}
BENCHMARK(BM_Grid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

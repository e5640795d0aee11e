#include <benchmark/benchmark.h>

#include "ssbench/spectral.hpp"

using namespace ssbench;

namespace {

Points bench_points(int n) {
  Rng rng(7);
  Points pts(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) pts(i, j) = rng.uniform(-1.0, 1.0);
  return pts;
}

void BM_BuildKnnGraph(benchmark::State& state) {
  const Points pts = bench_points(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_knn_graph(pts, 10));
}
BENCHMARK(BM_BuildKnnGraph)->Arg(256);

void BM_SpectralBasis(benchmark::State& state) {
  const Points pts = bench_points(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_spectral_basis(pts, 10));
}
BENCHMARK(BM_SpectralBasis)->Arg(128)->Arg(256);

void BM_LowFreqProject(benchmark::State& state) {
  const Points pts = bench_points(256);
  const SpectralBasis basis = build_spectral_basis(pts, 10);
  for (auto _ : state)
    benchmark::DoNotOptimize(low_freq_project(pts, basis, default_low_freq_count(256)));
}
BENCHMARK(BM_LowFreqProject);

}  // namespace

#include <benchmark/benchmark.h>

#include "ssbench/models.hpp"

using namespace ssbench;

namespace {

PointCloud bench_cloud(int n) {
  Rng rng(42);
  PointCloud c;
  c.points.resize(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) c.points(i, j) = rng.uniform(-1.0, 1.0);
  normalize_unit_sphere_inplace(c.points);
  c.label = 0;
  return c;
}

void BM_PointwiseForward(benchmark::State& state) {
  ClassifierSpec spec;
  spec.widths = {64, 128, 256};
  const auto model = make_classifier(spec, 1);
  const PointCloud c = bench_cloud(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(model->logits(c.points));
}
BENCHMARK(BM_PointwiseForward)->Arg(256)->Arg(1024);

void BM_EdgeConvForward(benchmark::State& state) {
  ClassifierSpec spec;
  spec.architecture = Architecture::edge_conv;
  spec.widths = {32, 48, 64};
  const auto model = make_classifier(spec, 1);
  const PointCloud c = bench_cloud(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(model->logits(c.points));
}
BENCHMARK(BM_EdgeConvForward)->Arg(256);

void BM_PointwiseInputGradient(benchmark::State& state) {
  ClassifierSpec spec;
  spec.widths = {64, 128, 256};
  const auto model = make_classifier(spec, 1);
  const PointCloud c = bench_cloud(static_cast<int>(state.range(0)));
  const LogitsLoss loss = [](const Eigen::VectorXd& z, Eigen::VectorXd* dz) {
    if (dz) *dz = Eigen::VectorXd::Ones(z.size());
    return z.sum();
  };
  Points grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->input_gradient(c.points, loss, grad));
    benchmark::DoNotOptimize(grad);
  }
}
BENCHMARK(BM_PointwiseInputGradient)->Arg(256);

void BM_Chamfer(benchmark::State& state) {
  const PointCloud a = bench_cloud(static_cast<int>(state.range(0)));
  const PointCloud b = bench_cloud(static_cast<int>(state.range(0)) + 1);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(a.points, b.points));
}
BENCHMARK(BM_Chamfer)->Arg(256)->Arg(1024);

}  // namespace

#include <benchmark/benchmark.h>

#include "ssbench/attacks.hpp"

using namespace ssbench;

namespace {

PointCloud bench_cloud(int n) {
  Rng rng(11);
  PointCloud c;
  c.points.resize(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) c.points(i, j) = rng.uniform(-1.0, 1.0);
  normalize_unit_sphere_inplace(c.points);
  c.label = 0;
  return c;
}

void BM_KnnLossWithGrad(benchmark::State& state) {
  ClassifierSpec spec;
  spec.widths = {32, 64, 128};
  const auto model = make_classifier(spec, 1);
  const PointCloud c = bench_cloud(256);
  AttackConfig cfg = AttackConfig::defaults_for(AttackKind::knn, false);
  Points grad;
  for (auto _ : state)
    benchmark::DoNotOptimize(loss_knn(c.points, *model, cfg, 0,
                                      TransformParams::identity(), 1.0, &grad));
}
BENCHMARK(BM_KnnLossWithGrad);

void BM_Adv3dIterations(benchmark::State& state) {
  ClassifierSpec spec;
  spec.widths = {32, 64, 128};
  const auto model = make_classifier(spec, 1);
  const PointCloud c = bench_cloud(256);
  AttackConfig cfg = AttackConfig::defaults_for(AttackKind::adv3d, false);
  cfg.iterations = static_cast<int>(state.range(0));
  cfg.binary_search_steps = 0;
  AttackContext ctx;
  ctx.model = model.get();
  for (auto _ : state) benchmark::DoNotOptimize(run_attack(ctx, c, cfg));
}
BENCHMARK(BM_Adv3dIterations)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

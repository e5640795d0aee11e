#include <doctest.h>

#include "helpers.hpp"
#include "ssbench/geometry.hpp"

using namespace ssbench;
using test_helpers::random_cloud;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("normalize_unit_sphere centers and scales") {
  PointCloud c;
  c.points.resize(2, 3);
  c.points << 0, 0, 0, 2, 0, 0;
  const PointCloud out = normalize_unit_sphere(c);
  CHECK(out.points(0, 0) == doctest::Approx(-1.0));
  CHECK(out.points(1, 0) == doctest::Approx(1.0));
  // original untouched
  CHECK(c.points(1, 0) == doctest::Approx(2.0));

  PointCloud already;
  already.points.resize(2, 3);
  already.points << 1, 0, 0, -1, 0, 0;
  const PointCloud same = normalize_unit_sphere(already);
  CHECK((same.points - already.points).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalize_unit_sphere postconditions on random clouds") {
  for (int t = 0; t < 5; ++t) {
    Rng rng(100 + t);
    PointCloud c;
    c.points.resize(50, 3);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 3; ++j) c.points(i, j) = rng.uniform(-7.0, 9.0);
    const PointCloud out = normalize_unit_sphere(c);
    CHECK(out.points.colwise().mean().norm() < 1e-6);
    CHECK(out.points.rowwise().norm().maxCoeff() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("normalize_unit_sphere rejects degenerate clouds") {
  PointCloud c;
  c.points.resize(1, 3);
  c.points << 5, 5, 5;
  CHECK_THROWS_WITH_AS(normalize_unit_sphere(c),
                       doctest::Contains("zero extent"), Error);
}

TEST_CASE("scale_transform componentwise and errors") {
  PointCloud c;
  c.points.resize(1, 3);
  c.points << 1, 2, 3;
  const PointCloud out = scale_transform(c, 0.5, 1.5, 1.0);
  CHECK(out.points(0, 0) == doctest::Approx(0.5));
  CHECK(out.points(0, 1) == doctest::Approx(3.0));
  CHECK(out.points(0, 2) == doctest::Approx(3.0));

  const PointCloud id = scale_transform(c, 1, 1, 1);
  CHECK((id.points - c.points).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_WITH_AS(scale_transform(c, 0.0, 1.0, 1.0),
                       doctest::Contains("singular scale"), Error);
}

TEST_CASE("scale then inverse scale is identity") {
  const PointCloud c = random_cloud(64, 42);
  const PointCloud fwd = scale_transform(c, 2, 2, 2);
  const PointCloud back = scale_transform(fwd, 0.5, 0.5, 0.5);
  CHECK((back.points - c.points).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("shear_transform matches hand matrix multiply") {
  PointCloud c;
  c.points.resize(1, 3);

  // (1,1,1) with d=0.1 only: x' = x, y' = y, z' = 0.1*x + z
  c.points << 1, 1, 1;
  PointCloud out = shear_transform(c, 0.1, 0, 0, 0);
  CHECK(out.points(0, 0) == doctest::Approx(1.0));
  CHECK(out.points(0, 1) == doctest::Approx(1.0));
  CHECK(out.points(0, 2) == doctest::Approx(1.1));

  // second basis row picks out (e, 1, f) for any coefficients
  c.points << 0, 1, 0;
  out = shear_transform(c, 0.4, 0.2, -0.3, 0.7);
  CHECK(out.points(0, 0) == doctest::Approx(0.2));
  CHECK(out.points(0, 1) == doctest::Approx(1.0));
  CHECK(out.points(0, 2) == doctest::Approx(-0.3));

  // all-zero coefficients: exact identity
  const PointCloud r = random_cloud(32, 7);
  const PointCloud same = shear_transform(r, 0, 0, 0, 0);
  CHECK((same.points - r.points).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_transform degenerate policies") {
  TransformPolicy policy;
  policy.p_a = 0.0;
  Rng rng(1);
  for (int i = 0; i < 10000; ++i)
    CHECK(sample_transform(policy, rng).kind == TransformKind::identity);

  policy.p_a = 1.0;
  policy.p_s = 1.0;
  Rng rng2(2);
  for (int i = 0; i < 1000; ++i) {
    const TransformParams p = sample_transform(policy, rng2);
    CHECK(p.kind == TransformKind::scale);
    for (double f : p.scale) {
      CHECK(f >= policy.scale_range.first);
      CHECK(f <= policy.scale_range.second);
    }
  }
}

TEST_CASE("sample_transform empirical frequencies match the schedule") {
  // fixed spot check at p_a=0.7, p_s=0.7 against (0.49, 0.21, 0.30)
  {
    TransformPolicy policy;
    policy.p_a = 0.7;
    policy.p_s = 0.7;
    Rng rng(33);
    int n_scale = 0, n_shear = 0, n_id = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      switch (sample_transform(policy, rng).kind) {
        case TransformKind::scale: ++n_scale; break;
        case TransformKind::shear: ++n_shear; break;
        case TransformKind::identity: ++n_id; break;
      }
    }
    CHECK(std::abs(n_scale / double(draws) - 0.49) < 0.01);
    CHECK(std::abs(n_shear / double(draws) - 0.21) < 0.01);
    CHECK(std::abs(n_id / double(draws) - 0.30) < 0.01);
  }

  // five random policies within three standard errors
  Rng meta(77);
  for (int t = 0; t < 5; ++t) {
    TransformPolicy policy;
    policy.p_a = meta.uniform();
    policy.p_s = meta.uniform();
    const double expected[3] = {policy.p_a * policy.p_s,
                                policy.p_a * (1.0 - policy.p_s), 1.0 - policy.p_a};
    Rng rng(1000 + t);
    const int draws = 100000;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < draws; ++i) {
      switch (sample_transform(policy, rng).kind) {
        case TransformKind::scale: ++counts[0]; break;
        case TransformKind::shear: ++counts[1]; break;
        case TransformKind::identity: ++counts[2]; break;
      }
    }
    for (int k = 0; k < 3; ++k) {
      const double se =
          std::sqrt(std::max(expected[k] * (1.0 - expected[k]) / draws, 1e-12));
      CHECK(std::abs(counts[k] / double(draws) - expected[k]) <= 3.0 * se + 1e-9);
    }
  }
}

TEST_CASE("sampled shear coefficients stay in range with random signs") {
  TransformPolicy policy;
  policy.p_a = 1.0;
  policy.p_s = 0.0;  // always shear
  policy.shear_range = {0.05, 0.15};
  Rng rng(5);
  int negatives = 0;
  for (int i = 0; i < 2000; ++i) {
    const TransformParams p = sample_transform(policy, rng);
    REQUIRE(p.kind == TransformKind::shear);
    for (double c : p.shear) {
      CHECK(std::abs(c) >= 0.05);
      CHECK(std::abs(c) <= 0.15);
      if (c < 0) ++negatives;
    }
  }
  // signs are drawn independently; both signs must show up in quantity
  CHECK(negatives > 3000);
  CHECK(negatives < 5000);
}

TEST_CASE("apply_transform dispatch and linearity") {
  const PointCloud x = random_cloud(40, 11);
  const PointCloud y = random_cloud(40, 12);

  CHECK((apply_transform(TransformParams::identity(), x).points - x.points)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  PointCloud single;
  single.points.resize(1, 3);
  single.points << 1, 2, 3;
  const PointCloud scaled =
      apply_transform(TransformParams::make_scale(0.5, 1.5, 1.0), single);
  CHECK(scaled.points(0, 0) == doctest::Approx(0.5));
  CHECK(scaled.points(0, 1) == doctest::Approx(3.0));
  CHECK(scaled.points(0, 2) == doctest::Approx(3.0));

  single.points << 1, 1, 1;
  const PointCloud sheared =
      apply_transform(TransformParams::make_shear(0.1, 0, 0, 0), single);
  CHECK(sheared.points(0, 2) == doctest::Approx(1.1));

  // T(aX + bY) = a T(X) + b T(Y)
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    TransformPolicy policy;
    policy.p_a = 1.0;
    policy.p_s = t % 2 == 0 ? 1.0 : 0.0;
    const TransformParams params = sample_transform(policy, rng);
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    const Points combo = a * x.points + b * y.points;
    const Points lhs = apply_transform(params, combo);
    const Points rhs =
        a * apply_transform(params, x.points) + b * apply_transform(params, y.points);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("transform params expose their matrix") {
  const TransformParams p = TransformParams::make_shear(0.1, 0.2, 0.3, 0.4);
  Eigen::Matrix3d m;
  m << 1, 0, 0.1, 0.2, 1, 0.3, 0.4, 0, 1;
  CHECK((p.matrix() - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("policy validation") {
  TransformPolicy policy;
  policy.p_a = 1.5;
  Rng rng(1);
  CHECK_THROWS_AS(sample_transform(policy, rng), Error);
}

TEST_SUITE_END();

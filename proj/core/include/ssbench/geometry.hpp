#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "ssbench/common.hpp"

namespace ssbench {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// N x 3 coordinate set, unit-sphere scale by convention. Rows are points.
struct PointCloud {
  Points points;
  std::optional<int> label;
  std::string id;

  Eigen::Index size() const { return points.rows(); }
};

enum class TransformKind { identity, scale, shear };

// One sampled deformation. scale = per-axis factors (a, b, c); shear =
// coefficients (d, e, f, g) applied as the row-vector matrix
//   [1 0 d]
//   [e 1 f]
//   [g 0 1]
struct TransformParams {
  TransformKind kind = TransformKind::identity;
  std::array<double, 3> scale{1.0, 1.0, 1.0};
  std::array<double, 4> shear{0.0, 0.0, 0.0, 0.0};

  Eigen::Matrix3d matrix() const;
  bool is_identity() const { return kind == TransformKind::identity; }

  static TransformParams identity() { return {}; }
  static TransformParams make_scale(double a, double b, double c);
  static TransformParams make_shear(double d, double e, double f, double g);
};

// Sampling schedule: scale with probability p_a*p_s, shear with probability
// p_a*(1-p_s), identity otherwise.
struct TransformPolicy {
  double p_a = 0.5;
  double p_s = 0.5;
  std::pair<double, double> scale_range{0.5, 1.5};
  std::pair<double, double> shear_range{0.0, 0.15};
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Recenters to the centroid and scales so the farthest point has norm 1.
// Throws "zero extent" for degenerate clouds.
PointCloud normalize_unit_sphere(const PointCloud& cloud);
void normalize_unit_sphere_inplace(Points& pts);

PointCloud scale_transform(const PointCloud& cloud, double a, double b, double c);
PointCloud shear_transform(const PointCloud& cloud, double d, double e, double f, double g);

TransformParams sample_transform(const TransformPolicy& policy, Rng& rng);

PointCloud apply_transform(const TransformParams& params, const PointCloud& cloud);
Points apply_transform(const TransformParams& params, const Points& pts);

void check_finite(const Points& pts, const char* what);

}  // namespace ssbench

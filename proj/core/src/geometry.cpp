#include "ssbench/geometry.hpp"

#include <cmath>

namespace ssbench {

void check_finite(const Points& pts, const char* what) {
  if (pts.rows() < 1) throw Error(std::string(what) + ": empty cloud");
  if (!pts.allFinite()) throw Error(std::string(what) + ": non-finite input");
}

Eigen::Matrix3d TransformParams::matrix() const {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  switch (kind) {
    case TransformKind::identity:
      break;
    case TransformKind::scale:
      m(0, 0) = scale[0];
      m(1, 1) = scale[1];
      m(2, 2) = scale[2];
      break;
    case TransformKind::shear:
      m(0, 2) = shear[0];  // d
      m(1, 0) = shear[1];  // e
      m(1, 2) = shear[2];  // f
      m(2, 0) = shear[3];  // g
      break;
  }
  return m;
}

TransformParams TransformParams::make_scale(double a, double b, double c) {
  TransformParams p;
  p.kind = TransformKind::scale;
  p.scale = {a, b, c};
  return p;
}

TransformParams TransformParams::make_shear(double d, double e, double f, double g) {
  TransformParams p;
  p.kind = TransformKind::shear;
  p.shear = {d, e, f, g};
  return p;
}

void TransformPolicy::validate() const {
  if (!(p_a >= 0.0 && p_a <= 1.0)) throw Error("transform policy: p_a outside [0,1]");
  if (!(p_s >= 0.0 && p_s <= 1.0)) throw Error("transform policy: p_s outside [0,1]");
  if (!(scale_range.first <= scale_range.second))
    throw Error("transform policy: empty scale range");
  if (!(shear_range.first <= shear_range.second))
    throw Error("transform policy: empty shear range");
}

void normalize_unit_sphere_inplace(Points& pts) {
  check_finite(pts, "normalize_unit_sphere");
  const Eigen::RowVector3d centroid = pts.colwise().mean();
  pts.rowwise() -= centroid;
  const double radius = pts.rowwise().norm().maxCoeff();
  if (radius < 1e-12) throw Error("normalize_unit_sphere: zero extent");
  pts /= radius;
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  PointCloud out = cloud;
  normalize_unit_sphere_inplace(out.points);
  return out;
}

PointCloud scale_transform(const PointCloud& cloud, double a, double b, double c) {
  check_finite(cloud.points, "scale_transform");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
    throw Error("scale_transform: non-finite factor");
  if (a == 0.0 || b == 0.0 || c == 0.0) throw Error("scale_transform: singular scale");
  PointCloud out = cloud;
  out.points.col(0) *= a;
  out.points.col(1) *= b;
  out.points.col(2) *= c;
  return out;
}

PointCloud shear_transform(const PointCloud& cloud, double d, double e, double f, double g) {
  check_finite(cloud.points, "shear_transform");
  if (!std::isfinite(d) || !std::isfinite(e) || !std::isfinite(f) || !std::isfinite(g))
    throw Error("shear_transform: non-finite coefficient");
  PointCloud out = cloud;
  out.points = cloud.points * TransformParams::make_shear(d, e, f, g).matrix();
  return out;
}

TransformParams sample_transform(const TransformPolicy& policy, Rng& rng) {
  policy.validate();
  if (rng.uniform() >= policy.p_a) return TransformParams::identity();

  if (rng.uniform() < policy.p_s) {
    const auto [lo, hi] = policy.scale_range;
    return TransformParams::make_scale(rng.uniform(lo, hi), rng.uniform(lo, hi),
                                       rng.uniform(lo, hi));
  }
  const auto [lo, hi] = policy.shear_range;
  std::array<double, 4> coeff{};
  for (double& c : coeff) {
    const double magnitude = rng.uniform(lo, hi);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    c = sign * magnitude;
  }
  return TransformParams::make_shear(coeff[0], coeff[1], coeff[2], coeff[3]);
}

Points apply_transform(const TransformParams& params, const Points& pts) {
  check_finite(pts, "apply_transform");
  switch (params.kind) {
    case TransformKind::identity:
      return pts;
    case TransformKind::scale: {
      if (params.scale[0] == 0.0 || params.scale[1] == 0.0 || params.scale[2] == 0.0)
        throw Error("apply_transform: singular scale");
      Points out = pts;
      out.col(0) *= params.scale[0];
      out.col(1) *= params.scale[1];
      out.col(2) *= params.scale[2];
      return out;
    }
    case TransformKind::shear:
      return pts * params.matrix();
  }
  throw Error("apply_transform: unknown kind");
}

PointCloud apply_transform(const TransformParams& params, const PointCloud& cloud) {
  PointCloud out = cloud;
  out.points = apply_transform(params, cloud.points);
  return out;
}

}  // namespace ssbench

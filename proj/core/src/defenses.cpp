#include "ssbench/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal/net_util.hpp"

namespace ssbench {

std::string defense_kind_name(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::none: return "none";
    case DefenseKind::srs: return "srs";
    case DefenseKind::sor: return "sor";
  }
  throw Error("unknown defense kind");
}

DefenseKind defense_kind_from_name(const std::string& name) {
  if (name == "none") return DefenseKind::none;
  if (name == "srs") return DefenseKind::srs;
  if (name == "sor") return DefenseKind::sor;
  throw Error("unknown defense \"" + name + "\"; expected none, srs, or sor");
}

void DefenseConfig::validate() const {
  if (sor_k < 1) throw Error("defense config: sor_k < 1");
  if (!(sor_alpha > 0.0)) throw Error("defense config: sor_alpha must be positive");
}

namespace {

PointCloud keep_rows(const PointCloud& cloud, const std::vector<int>& rows) {
  PointCloud out;
  out.label = cloud.label;
  out.id = cloud.id;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.points.row(static_cast<Eigen::Index>(i)) = cloud.points.row(rows[i]);
  return out;
}

}  // namespace

PointCloud defend_srs(const PointCloud& cloud, const DefenseConfig& cfg, Rng& rng) {
  cfg.validate();
  check_finite(cloud.points, "defend_srs");
  const int n = static_cast<int>(cloud.points.rows());
  const int drop = cfg.srs_drop < 0 ? n / 2 : cfg.srs_drop;
  if (drop >= n) throw Error("defend_srs: srs_drop must be smaller than N");
  if (drop == 0) return cloud;

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(idx);
  std::vector<int> kept(idx.begin(), idx.begin() + (n - drop));
  std::sort(kept.begin(), kept.end());
  return keep_rows(cloud, kept);
}

Eigen::VectorXd sor_mean_knn_dists(const Points& pts, int k) {
  const Eigen::Index n = pts.rows();
  if (n <= k) throw Error("sor_mean_knn_dists: need N > k");
  const Eigen::MatrixXd d = internal::pairwise_sq_dists(pts);
  const Eigen::MatrixXi nbrs = internal::knn_indices(pts, k);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += std::sqrt(d(i, nbrs(i, j)));
    out(i) = acc / static_cast<double>(k);
  }
  return out;
}

PointCloud defend_sor(const PointCloud& cloud, const DefenseConfig& cfg) {
  cfg.validate();
  check_finite(cloud.points, "defend_sor");
  const Eigen::Index n = cloud.points.rows();
  if (n <= cfg.sor_k) throw Error("defend_sor: need N > sor_k");

  const Eigen::VectorXd d = sor_mean_knn_dists(cloud.points, cfg.sor_k);
  const double mean = d.mean();
  const double var = (d.array() - mean).square().mean();
  const double threshold = mean + cfg.sor_alpha * std::sqrt(std::max(var, 0.0));

  std::vector<int> kept;
  kept.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    if (d(i) <= threshold) kept.push_back(static_cast<int>(i));
  if (kept.empty()) throw Error("defend_sor: degenerate after SOR (all points removed)");
  return keep_rows(cloud, kept);
}

PointCloud apply_defense(const PointCloud& cloud, const DefenseConfig& cfg, Rng& rng) {
  switch (cfg.kind) {
    case DefenseKind::none: return cloud;
    case DefenseKind::srs: return defend_srs(cloud, cfg, rng);
    case DefenseKind::sor: return defend_sor(cloud, cfg);
  }
  throw Error("unknown defense kind");
}

}  // namespace ssbench

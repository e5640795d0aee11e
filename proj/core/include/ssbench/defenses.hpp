#pragma once

#include <string>

#include "ssbench/geometry.hpp"

namespace ssbench {

enum class DefenseKind { none, srs, sor };

std::string defense_kind_name(DefenseKind kind);
DefenseKind defense_kind_from_name(const std::string& name);

struct DefenseConfig {
  DefenseKind kind = DefenseKind::none;
  int srs_drop = -1;       // -1 -> N/2 at application time
  int sor_k = 2;
  double sor_alpha = 1.1;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Simple random sampling: drops srs_drop points uniformly at random,
// order-preserving. Deterministic given the rng stream.
PointCloud defend_srs(const PointCloud& cloud, const DefenseConfig& cfg, Rng& rng);

// Statistical outlier removal: drops points whose mean distance to their
// sor_k nearest neighbors exceeds mean + sor_alpha * std over the cloud.
PointCloud defend_sor(const PointCloud& cloud, const DefenseConfig& cfg);

// Dispatch on cfg.kind; none returns the cloud unchanged.
PointCloud apply_defense(const PointCloud& cloud, const DefenseConfig& cfg, Rng& rng);

// Mean (not squared) kNN distance per point, the SOR statistic.
Eigen::VectorXd sor_mean_knn_dists(const Points& pts, int k);

}  // namespace ssbench

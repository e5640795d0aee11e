#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <numeric>
#include <vector>

#include "ssbench/common.hpp"

namespace ssbench::internal {

inline Eigen::MatrixXd he_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(rows));
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = rng.normal(0.0, stddev);
  return w;
}

// y = relu(x * W + 1 b); rows of x are independent items.
inline Eigen::MatrixXd dense_relu(const Eigen::MatrixXd& x, const Eigen::MatrixXd& W,
                                  const Eigen::MatrixXd& b) {
  Eigen::MatrixXd y = x * W;
  y.rowwise() += b.row(0);
  return y.cwiseMax(0.0);
}

inline Eigen::MatrixXd dense_linear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& W,
                                    const Eigen::MatrixXd& b) {
  Eigen::MatrixXd y = x * W;
  y.rowwise() += b.row(0);
  return y;
}

// Pairwise squared Euclidean distances between rows.
inline Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& pts) {
  const Eigen::VectorXd sq = pts.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * (pts * pts.transpose());
  d.colwise() += sq;
  d.rowwise() += sq.transpose();
  return d.cwiseMax(0.0);
}

// Indices of the k nearest rows (self excluded) for every row, ties broken by
// index so the result is deterministic.
inline Eigen::MatrixXi knn_indices(const Eigen::MatrixXd& pts, int k) {
  const Eigen::Index n = pts.rows();
  if (k < 1 || k >= n) throw Error("knn_indices: need 1 <= k < N");
  const Eigen::MatrixXd d = pairwise_sq_dists(pts);
  Eigen::MatrixXi nbrs(n, k);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n) - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    order.clear();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) order.push_back(static_cast<int>(j));
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](int a, int b) {
                        const double da = d(i, a), db = d(i, b);
                        return da < db || (da == db && a < b);
                      });
    for (int j = 0; j < k; ++j) nbrs(i, j) = order[j];
  }
  return nbrs;
}

}  // namespace ssbench::internal

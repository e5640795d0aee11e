#include "ssbench/spectral.hpp"

#include <Eigen/Eigenvalues>

#include "internal/net_util.hpp"

namespace ssbench {

Eigen::MatrixXd build_knn_graph(const Points& pts, int k) {
  check_finite(pts, "build_knn_graph");
  const Eigen::Index n = pts.rows();
  if (k < 1 || k >= n) throw Error("build_knn_graph: need 1 <= k < N");

  const Eigen::MatrixXd dists = internal::pairwise_sq_dists(pts);
  const Eigen::MatrixXi nbrs = internal::knn_indices(pts, k);

  double sigma_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) sigma_sq += dists(i, nbrs(i, j));
  sigma_sq /= static_cast<double>(n * k);
  if (sigma_sq <= 0.0) throw Error("build_knn_graph: degenerate cloud (zero kNN spread)");

  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) {
      const Eigen::Index o = nbrs(i, j);
      const double w = std::exp(-dists(i, o) / sigma_sq);
      adj(i, o) = w;
      adj(o, i) = w;
    }
  return adj;
}

Eigen::MatrixXd graph_laplacian(const Eigen::MatrixXd& adjacency) {
  const Eigen::Index n = adjacency.rows();
  if (adjacency.cols() != n) throw Error("graph_laplacian: non-square adjacency");
  if (!adjacency.isApprox(adjacency.transpose(), 1e-12))
    throw Error("graph_laplacian: asymmetric adjacency");
  if ((adjacency.array() < 0.0).any())
    throw Error("graph_laplacian: negative weight");
  Eigen::MatrixXd lap = -adjacency;
  lap.diagonal() = adjacency.rowwise().sum() - adjacency.diagonal();
  return lap;
}

SpectralBasis build_spectral_basis(const Points& pts, int k_graph,
                                   const std::string& cloud_id) {
  const Eigen::MatrixXd lap = graph_laplacian(build_knn_graph(pts, k_graph));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success)
    throw Error("build_spectral_basis: eigendecomposition failed");
  SpectralBasis basis;
  basis.eigenvalues = solver.eigenvalues();  // ascending
  basis.eigenvectors = solver.eigenvectors();
  basis.k_graph = k_graph;
  basis.source_cloud_id = cloud_id;
  return basis;
}

std::pair<Points, Points> low_freq_project(const Points& pts, const SpectralBasis& basis,
                                           int K) {
  const Eigen::Index n = pts.rows();
  if (basis.size() != n)
    throw Error("low_freq_project: basis built for N=" + std::to_string(basis.size()) +
                ", cloud has N=" + std::to_string(n));
  if (K < 1 || K > n) throw Error("low_freq_project: K out of range");
  const auto uk = basis.eigenvectors.leftCols(K);
  const Points lfc = uk * (uk.transpose() * pts);
  return {lfc, pts - lfc};
}

Points low_freq_project_backward(const Points& grad_lfc, const SpectralBasis& basis,
                                 int K) {
  if (basis.size() != grad_lfc.rows())
    throw Error("low_freq_project_backward: basis/gradient size mismatch");
  if (K < 1 || K > basis.size()) throw Error("low_freq_project_backward: K out of range");
  const auto uk = basis.eigenvectors.leftCols(K);
  return uk * (uk.transpose() * grad_lfc);  // projector is symmetric
}

int default_low_freq_count(Eigen::Index n) {
  const int k = static_cast<int>((n + 5) / 10);  // N/10, rounded
  return std::max(1, k);
}

}  // namespace ssbench

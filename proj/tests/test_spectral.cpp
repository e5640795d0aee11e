#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "ssbench/spectral.hpp"

using namespace ssbench;
using test_helpers::random_cloud;

namespace {

// independent O(N^2) adjacency reconstruction
Eigen::MatrixXd knn_graph_oracle(const Points& pts, int k) {
  const Eigen::Index n = pts.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      d(i, j) = (pts.row(i) - pts.row(j)).squaredNorm();

  std::vector<std::vector<int>> nbrs(n);
  double sigma_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<int> order;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) order.push_back(static_cast<int>(j));
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return d(i, a) < d(i, b) || (d(i, a) == d(i, b) && a < b);
    });
    order.resize(k);
    nbrs[i] = order;
    for (int j : order) sigma_sq += d(i, j);
  }
  sigma_sq /= static_cast<double>(n * k);

  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j : nbrs[i]) {
      adj(i, j) = std::exp(-d(i, j) / sigma_sq);
      adj(j, i) = adj(i, j);
    }
  return adj;
}

}  // namespace

TEST_SUITE_BEGIN("spectral");

TEST_CASE("three collinear points with k=1 symmetrize through the middle") {
  Points pts(3, 3);
  pts << 0, 0, 0, 1, 0, 0, 2.5, 0, 0;
  const Eigen::MatrixXd adj = build_knn_graph(pts, 1);
  // middle point is the nearest of both ends, so both edges survive
  CHECK(adj(0, 1) > 0.0);
  CHECK(adj(1, 2) > 0.0);
  CHECK(adj(0, 2) == 0.0);
  CHECK(adj.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK((adj - adj.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adjacency matches the brute-force oracle exactly") {
  for (int t = 0; t < 3; ++t) {
    const PointCloud c = random_cloud(64, 300 + t);
    const Eigen::MatrixXd adj = build_knn_graph(c.points, 6);
    const Eigen::MatrixXd oracle = knn_graph_oracle(c.points, 6);
    CHECK((adj - oracle).cwiseAbs().maxCoeff() == 0.0);
    CHECK((adj - adj.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  const PointCloud c = random_cloud(16, 1);
  CHECK_THROWS_AS(build_knn_graph(c.points, 16), Error);
}

TEST_CASE("laplacian definition and null space") {
  Eigen::MatrixXd adj(2, 2);
  adj << 0, 0.7, 0.7, 0;
  const Eigen::MatrixXd lap = graph_laplacian(adj);
  CHECK(lap(0, 0) == doctest::Approx(0.7));
  CHECK(lap(0, 1) == doctest::Approx(-0.7));
  CHECK(lap(1, 0) == doctest::Approx(-0.7));
  CHECK(lap(1, 1) == doctest::Approx(0.7));

  const PointCloud c = random_cloud(40, 5);
  const Eigen::MatrixXd big = graph_laplacian(build_knn_graph(c.points, 5));
  CHECK((big * Eigen::VectorXd::Ones(40)).cwiseAbs().maxCoeff() < 1e-10);

  Eigen::MatrixXd asym(2, 2);
  asym << 0, 1, 0, 0;
  CHECK_THROWS_WITH_AS(graph_laplacian(asym), doctest::Contains("asymmetric"), Error);
}

TEST_CASE("eigenvalues of small graphs match closed forms") {
  // single edge of weight w: eigenvalues {0, 2w}
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(2, 2);
  adj(0, 1) = adj(1, 0) = 0.35;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(graph_laplacian(adj));
  CHECK(solver.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(solver.eigenvalues()(1) == doctest::Approx(0.7));
}

TEST_CASE("basis invariants: ordering, orthonormality, Rayleigh quotients") {
  const PointCloud c = random_cloud(72, 9);
  const SpectralBasis basis = build_spectral_basis(c.points, 10, c.id);
  const Eigen::MatrixXd lap = graph_laplacian(build_knn_graph(c.points, 10));

  CHECK(basis.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-6));
  for (Eigen::Index i = 1; i < basis.size(); ++i) {
    CHECK(basis.eigenvalues(i) >= basis.eigenvalues(i - 1) - 1e-12);
    CHECK(basis.eigenvalues(i) >= -1e-8);
  }

  const Eigen::MatrixXd gram =
      basis.eigenvectors.transpose() * basis.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(72, 72)).cwiseAbs().maxCoeff() < 1e-6);

  for (Eigen::Index i = 0; i < basis.size(); i += 7) {
    const Eigen::VectorXd u = basis.eigenvectors.col(i);
    CHECK(u.dot(lap * u) == doctest::Approx(basis.eigenvalues(i)).epsilon(1e-6));
    // eigen-residual against the dense operator
    CHECK((lap * u - basis.eigenvalues(i) * u).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("projection splits, reconstructs, and is idempotent") {
  const PointCloud c = random_cloud(64, 21);
  const SpectralBasis basis = build_spectral_basis(c.points, 8, c.id);

  const auto [lfc_full, hfc_full] = low_freq_project(c.points, basis, 64);
  CHECK((lfc_full - c.points).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(hfc_full.cwiseAbs().maxCoeff() < 1e-8);

  const int k = default_low_freq_count(64);
  const auto [lfc, hfc] = low_freq_project(c.points, basis, k);
  CHECK((lfc + hfc - c.points).cwiseAbs().maxCoeff() == 0.0);  // by construction
  // high-frequency part is orthogonal to the retained band
  const Eigen::MatrixXd residue = basis.eigenvectors.leftCols(k).transpose() * hfc;
  CHECK(residue.cwiseAbs().maxCoeff() < 1e-6);

  const auto [lfc2, hfc2] = low_freq_project(lfc, basis, k);
  CHECK((lfc2 - lfc).cwiseAbs().maxCoeff() < 1e-8);

  CHECK_THROWS_AS(low_freq_project(c.points, basis, 0), Error);
  CHECK_THROWS_AS(low_freq_project(c.points, basis, 65), Error);
}

TEST_CASE("constant cloud component lies in the zero eigenspace") {
  const PointCloud c = random_cloud(48, 33);
  const SpectralBasis basis = build_spectral_basis(c.points, 6, c.id);
  Points constant(48, 3);
  constant.col(0).setConstant(0.4);
  constant.col(1).setConstant(-0.2);
  constant.col(2).setConstant(0.9);
  const auto [lfc, hfc] = low_freq_project(constant, basis, 1);
  // connected graph: the lone zero eigenvector is the constant vector
  CHECK((lfc - constant).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("projection commutes with global scaling") {
  const PointCloud c = random_cloud(56, 41);
  const SpectralBasis basis = build_spectral_basis(c.points, 7, c.id);
  const int k = 9;
  const auto [lfc, hfc] = low_freq_project(c.points, basis, k);
  const auto [lfc_scaled, hfc_scaled] =
      low_freq_project(Points(2.5 * c.points), basis, k);
  CHECK((lfc_scaled - 2.5 * lfc).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("default retained band is N/10 rounded") {
  CHECK(default_low_freq_count(256) == 26);
  CHECK(default_low_freq_count(64) == 6);  // 6.4 -> 6
  CHECK(default_low_freq_count(5) == 1);
}

TEST_SUITE_END();

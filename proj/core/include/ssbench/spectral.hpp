#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>

#include "ssbench/geometry.hpp"

namespace ssbench {

// Graph-Laplacian eigenbasis of a point cloud, built once from a reference
// cloud and held fixed. Eigenvalues nondecreasing, eigenvectors orthonormal.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // columns
  int k_graph = 10;
  std::string source_cloud_id;

  Eigen::Index size() const { return eigenvalues.size(); }
};

// Mutual-kNN adjacency (edge kept if either endpoint selects the other),
// Gaussian weights exp(-d^2/sigma^2) with sigma^2 = mean squared kNN
// distance, zero diagonal.
Eigen::MatrixXd build_knn_graph(const Points& pts, int k);

// Combinatorial Laplacian L = D - A.
Eigen::MatrixXd graph_laplacian(const Eigen::MatrixXd& adjacency);

SpectralBasis build_spectral_basis(const Points& pts, int k_graph = 10,
                                   const std::string& cloud_id = "");

// X_lfc = U_K U_K^T X over the first K eigenvectors; X_hfc = X - X_lfc.
std::pair<Points, Points> low_freq_project(const Points& pts, const SpectralBasis& basis,
                                           int K);

// Gradient of a function of X_lfc back to X: U_K (U_K^T G).
Points low_freq_project_backward(const Points& grad_lfc, const SpectralBasis& basis,
                                 int K);

int default_low_freq_count(Eigen::Index n);

}  // namespace ssbench

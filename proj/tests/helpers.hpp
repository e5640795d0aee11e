#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include "ssbench/dataset.hpp"
#include "ssbench/geometry.hpp"
#include "ssbench/models.hpp"

namespace test_helpers {

using namespace ssbench;

// uniform points in the unit ball, already normalized
inline PointCloud random_cloud(int n, std::uint64_t seed, int label = 0) {
  Rng rng(seed);
  PointCloud cloud;
  cloud.points.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) cloud.points(i, c) = rng.uniform(-1.0, 1.0);
  }
  normalize_unit_sphere_inplace(cloud.points);
  cloud.label = label;
  cloud.id = "random_" + std::to_string(seed);
  return cloud;
}

// central finite differences of a scalar function of the coordinates
template <typename Fn>
Points fd_gradient(const Points& pts, const Fn& fn, double h = 1e-3) {
  Points grad(pts.rows(), 3);
  Points work = pts;
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (int c = 0; c < 3; ++c) {
      const double orig = work(i, c);
      work(i, c) = orig + h;
      const double up = fn(work);
      work(i, c) = orig - h;
      const double down = fn(work);
      work(i, c) = orig;
      grad(i, c) = (up - down) / (2.0 * h);
    }
  return grad;
}

inline double max_rel_error(const Points& approx, const Points& exact) {
  const double scale = std::max(exact.cwiseAbs().maxCoeff(), 1e-12);
  return (approx - exact).cwiseAbs().maxCoeff() / scale;
}

// fd_gradient on a deterministic subset of coordinates, for expensive losses
template <typename Fn>
double fd_subset_rel_error(const Points& pts, const Points& analytic, const Fn& fn,
                           int n_coords, std::uint64_t seed, double h = 1e-3) {
  Rng rng(seed);
  Points work = pts;
  const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-12);
  double worst = 0.0;
  for (int t = 0; t < n_coords; ++t) {
    const Eigen::Index i =
        static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(pts.rows())));
    const int c = static_cast<int>(rng.uniform_int(3));
    const double orig = work(i, c);
    work(i, c) = orig + h;
    const double up = fn(work);
    work(i, c) = orig - h;
    const double down = fn(work);
    work(i, c) = orig;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic(i, c)) / scale);
  }
  return worst;
}

// small dataset + trained pointwise model shared by heavier suites
inline DatasetSpec tiny_dataset_spec(int per_class = 12, int points = 64) {
  DatasetSpec spec;
  spec.classes = {"sphere", "cube", "plane", "torus"};
  spec.samples_per_class = per_class;
  spec.points_per_cloud = points;
  spec.noise_sigma = 0.01;
  spec.train_fraction = 0.75;
  spec.test_fraction = 0.25;
  spec.rng_seed = 99;
  return spec;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("ssbench_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace test_helpers

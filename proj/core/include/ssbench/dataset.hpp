#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ssbench/geometry.hpp"

namespace ssbench {

// Synthetic stand-in for a mesh-sampled classification dataset.
struct DatasetSpec {
  std::vector<std::string> classes = {"sphere", "cube",  "cylinder", "cone",
                                      "torus",  "plane", "pyramid",  "helix"};
  int samples_per_class = 100;
  int points_per_cloud = 256;
  double noise_sigma = 0.01;
  double train_fraction = 0.8;
  double test_fraction = 0.2;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct Dataset {
  std::vector<PointCloud> train;
  std::vector<PointCloud> test;
  int num_classes = 0;
};

const std::vector<std::string>& supported_shapes();

// Uniform surface samples + Gaussian jitter, unit-sphere normalized.
// Deterministic given spec.rng_seed; per-sample streams, so parallel-safe.
Dataset generate_synthetic(const DatasetSpec& spec);

// Directory of *.xyzl / *.pcb files plus labels.csv ("filename,label").
// Clouds are normalized on load; ordering is stable by filename.
std::vector<PointCloud> load_dataset(const std::filesystem::path& dir);

// Loads <root>/train and <root>/test as written by save_dataset.
Dataset load_split_dataset(const std::filesystem::path& root);

void save_dataset(const std::filesystem::path& root, const Dataset& dataset,
                  const std::string& format = "pcb");

}  // namespace ssbench

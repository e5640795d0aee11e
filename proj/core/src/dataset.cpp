#include "ssbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ssbench/io.hpp"

namespace ssbench {

namespace fs = std::filesystem;

void DatasetSpec::validate() const {
  if (classes.empty()) throw Error("dataset spec: classes empty");
  if (samples_per_class < 1) throw Error("dataset spec: samples_per_class < 1");
  if (points_per_cloud < 16) throw Error("dataset spec: points_per_cloud < 16");
  if (noise_sigma < 0.0) throw Error("dataset spec: negative noise_sigma");
  if (std::abs(train_fraction + test_fraction - 1.0) > 1e-9)
    throw Error("dataset spec: train_fraction + test_fraction must be 1");
}

const std::vector<std::string>& supported_shapes() {
  static const std::vector<std::string> shapes = {
      "sphere", "cube", "cylinder", "cone", "torus", "plane", "pyramid", "helix"};
  return shapes;
}

namespace {

Eigen::RowVector3d sample_sphere(Rng& rng) {
  // normalized Gaussian, uniform on the sphere
  Eigen::RowVector3d v(rng.normal(), rng.normal(), rng.normal());
  double n = v.norm();
  while (n < 1e-9) {
    v = {rng.normal(), rng.normal(), rng.normal()};
    n = v.norm();
  }
  return v / n;
}

Eigen::RowVector3d sample_cube(Rng& rng) {
  const int face = static_cast<int>(rng.uniform_int(6));
  const double u = rng.uniform(-1.0, 1.0);
  const double v = rng.uniform(-1.0, 1.0);
  switch (face) {
    case 0: return {1.0, u, v};
    case 1: return {-1.0, u, v};
    case 2: return {u, 1.0, v};
    case 3: return {u, -1.0, v};
    case 4: return {u, v, 1.0};
    default: return {u, v, -1.0};
  }
}

Eigen::RowVector3d sample_cylinder(Rng& rng) {
  const double r = 0.7, h = 1.6;
  const double lateral = 2.0 * M_PI * r * h;
  const double caps = 2.0 * M_PI * r * r;
  if (rng.uniform() < lateral / (lateral + caps)) {
    const double t = rng.uniform(0.0, 2.0 * M_PI);
    return {r * std::cos(t), r * std::sin(t), rng.uniform(-h / 2, h / 2)};
  }
  const double t = rng.uniform(0.0, 2.0 * M_PI);
  const double rho = r * std::sqrt(rng.uniform());
  const double z = rng.uniform() < 0.5 ? -h / 2 : h / 2;
  return {rho * std::cos(t), rho * std::sin(t), z};
}

Eigen::RowVector3d sample_cone(Rng& rng) {
  const double r = 0.8, h = 1.4;
  const double slant = std::sqrt(r * r + h * h);
  const double lateral = M_PI * r * slant;
  const double base = M_PI * r * r;
  const double t = rng.uniform(0.0, 2.0 * M_PI);
  if (rng.uniform() < lateral / (lateral + base)) {
    const double rho = r * std::sqrt(rng.uniform());  // area-uniform on the unrolled cone
    const double z = h / 2 - (rho / r) * h;
    return {rho * std::cos(t), rho * std::sin(t), z};
  }
  const double rho = r * std::sqrt(rng.uniform());
  return {rho * std::cos(t), rho * std::sin(t), -h / 2};
}

Eigen::RowVector3d sample_torus(Rng& rng) {
  const double R = 0.7, r = 0.25;
  // rejection on the minor angle keeps the surface density uniform
  double phi;
  for (;;) {
    phi = rng.uniform(0.0, 2.0 * M_PI);
    if (rng.uniform() < (R + r * std::cos(phi)) / (R + r)) break;
  }
  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  const double w = R + r * std::cos(phi);
  return {w * std::cos(theta), w * std::sin(theta), r * std::sin(phi)};
}

Eigen::RowVector3d sample_plane(Rng& rng) {
  return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0};
}

Eigen::RowVector3d sample_pyramid(Rng& rng) {
  const double s = 0.8, h = 1.3;  // half base side, height
  const Eigen::RowVector3d apex(0, 0, h / 2);
  const Eigen::RowVector3d corners[4] = {
      {s, s, -h / 2}, {-s, s, -h / 2}, {-s, -s, -h / 2}, {s, -s, -h / 2}};
  const double base_area = 4.0 * s * s;
  const double face_h = std::sqrt(h * h + s * s);
  const double face_area = s * face_h;  // (1/2)*base(2s)*slant height
  const double total = base_area + 4.0 * face_area;
  const double pick = rng.uniform(0.0, total);
  if (pick < base_area)
    return {rng.uniform(-s, s), rng.uniform(-s, s), -h / 2};
  const int face = std::min(3, static_cast<int>((pick - base_area) / face_area));
  const Eigen::RowVector3d& a = corners[face];
  const Eigen::RowVector3d& b = corners[(face + 1) % 4];
  double u = rng.uniform(), v = rng.uniform();
  if (u + v > 1.0) {
    u = 1.0 - u;
    v = 1.0 - v;
  }
  return a + u * (b - a) + v * (apex - a);
}

Eigen::RowVector3d sample_helix(Rng& rng) {
  const double turns = 2.5, R = 0.7, height = 1.8;
  const double t = rng.uniform(0.0, 1.0);
  const double angle = 2.0 * M_PI * turns * t;
  return {R * std::cos(angle), R * std::sin(angle), height * (t - 0.5)};
}

using ShapeSampler = Eigen::RowVector3d (*)(Rng&);

ShapeSampler sampler_for(const std::string& shape) {
  static const std::map<std::string, ShapeSampler> table = {
      {"sphere", sample_sphere}, {"cube", sample_cube},
      {"cylinder", sample_cylinder}, {"cone", sample_cone},
      {"torus", sample_torus}, {"plane", sample_plane},
      {"pyramid", sample_pyramid}, {"helix", sample_helix}};
  const auto it = table.find(shape);
  if (it == table.end()) {
    std::string names;
    for (const auto& s : supported_shapes()) names += (names.empty() ? "" : ", ") + s;
    throw Error("unknown shape \"" + shape + "\"; supported: " + names);
  }
  return it->second;
}

PointCloud make_sample(const DatasetSpec& spec, int class_idx, int sample_idx) {
  Rng rng(mix_seed(spec.rng_seed, static_cast<std::uint64_t>(class_idx) * 1000003 +
                                      static_cast<std::uint64_t>(sample_idx)));
  const ShapeSampler sampler = sampler_for(spec.classes[class_idx]);
  PointCloud cloud;
  cloud.points.resize(spec.points_per_cloud, 3);
  if (spec.classes[class_idx] == "sphere") {
    // antipodal pairs: the sample centroid is exactly zero, so unit-sphere
    // normalization leaves the radii at 1
    int i = 0;
    for (; i + 1 < spec.points_per_cloud; i += 2) {
      const Eigen::RowVector3d v = sampler(rng);
      cloud.points.row(i) = v;
      cloud.points.row(i + 1) = -v;
    }
    if (i < spec.points_per_cloud) cloud.points.row(i) = sampler(rng);
  } else {
    for (int i = 0; i < spec.points_per_cloud; ++i)
      cloud.points.row(i) = sampler(rng);
  }
  if (spec.noise_sigma > 0.0)
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i)
      for (int c = 0; c < 3; ++c) cloud.points(i, c) += rng.normal(0.0, spec.noise_sigma);
  normalize_unit_sphere_inplace(cloud.points);
  cloud.label = class_idx;
  {
    std::ostringstream id;
    id << spec.classes[class_idx] << "_";
    id.width(5);
    id.fill('0');
    id << sample_idx;
    cloud.id = id.str();
  }
  return cloud;
}

}  // namespace

Dataset generate_synthetic(const DatasetSpec& spec) {
  spec.validate();
  for (const auto& c : spec.classes) sampler_for(c);  // fail fast on unknown shapes

  Dataset out;
  out.num_classes = static_cast<int>(spec.classes.size());
  const int per = spec.samples_per_class;
  const int train_per = static_cast<int>(std::llround(spec.train_fraction * per));

  std::vector<PointCloud> all(static_cast<std::size_t>(out.num_classes) * per);
  parallel_for(all.size(), default_workers(), [&](std::size_t i) {
    const int ci = static_cast<int>(i) / per;
    const int si = static_cast<int>(i) % per;
    all[i] = make_sample(spec, ci, si);
  });

  Rng split_rng(mix_seed(spec.rng_seed, 0x5117));
  for (int ci = 0; ci < out.num_classes; ++ci) {
    std::vector<int> idx(per);
    for (int i = 0; i < per; ++i) idx[i] = i;
    split_rng.shuffle(idx);
    for (int i = 0; i < per; ++i) {
      auto& cloud = all[static_cast<std::size_t>(ci) * per + idx[i]];
      (i < train_per ? out.train : out.test).push_back(std::move(cloud));
    }
  }
  return out;
}

std::vector<PointCloud> load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".xyzl" || ext == ".pcb"))
      files.push_back(entry.path());
  }
  if (files.empty()) throw Error("no point files in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  const fs::path labels_path = dir / "labels.csv";
  std::ifstream labels_file(labels_path);
  if (!labels_file) throw Error("missing labels.csv in " + dir.string());
  std::map<std::string, int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(labels_file, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("filename,", 0) == 0) continue;  // header
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw Error(labels_path.string() + ":" + std::to_string(lineno) + ": expected filename,label");
    const std::string name = line.substr(0, comma);
    int label;
    try {
      label = std::stoi(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw Error(labels_path.string() + ":" + std::to_string(lineno) + ": malformed label");
    }
    if (label < 0)
      throw Error(labels_path.string() + ":" + std::to_string(lineno) + ": label out of range");
    labels[name] = label;
  }

  std::vector<PointCloud> clouds;
  clouds.reserve(files.size());
  for (const auto& f : files) {
    PointCloud cloud = read_point_file(f);
    const auto it = labels.find(f.filename().string());
    if (it == labels.end()) throw Error("no label for file " + f.filename().string());
    cloud.label = it->second;
    normalize_unit_sphere_inplace(cloud.points);
    clouds.push_back(std::move(cloud));
  }
  return clouds;
}

Dataset load_split_dataset(const fs::path& root) {
  Dataset out;
  out.train = load_dataset(root / "train");
  out.test = load_dataset(root / "test");
  int max_label = -1;
  for (const auto* split : {&out.train, &out.test})
    for (const auto& c : *split) max_label = std::max(max_label, c.label.value_or(-1));
  out.num_classes = max_label + 1;
  if (out.num_classes < 1) throw Error("dataset has no labels");
  return out;
}

void save_dataset(const fs::path& root, const Dataset& dataset, const std::string& format) {
  if (format != "pcb" && format != "xyzl")
    throw Error("unsupported dataset format: " + format);

  const auto save_split = [&](const std::string& name, const std::vector<PointCloud>& split) {
    const fs::path dir = root / name;
    fs::create_directories(dir);
    std::ofstream labels(dir / "labels.csv");
    if (!labels) throw Error("cannot write labels.csv in " + dir.string());
    labels << "filename,label\n";
    for (const auto& cloud : split) {
      if (!cloud.label) throw Error("cannot save unlabeled cloud " + cloud.id);
      const std::string filename = cloud.id + "." + format;
      if (format == "pcb")
        write_pcb(dir / filename, cloud);
      else
        write_xyzl(dir / filename, cloud, dataset.num_classes);
      labels << filename << "," << *cloud.label << "\n";
    }
  };
  save_split("train", dataset.train);
  save_split("test", dataset.test);
}

}  // namespace ssbench

#pragma once

#include <filesystem>
#include <string>

#include "ssbench/geometry.hpp"

namespace ssbench {

// "xyzl": UTF-8 text. Header line "N C" (point count, class count), then N
// lines "x y z", then an optional trailing line "label k". class_count 0
// means "unknown"; labels are range-checked against it only when positive.
void write_xyzl(const std::filesystem::path& path, const PointCloud& cloud,
                int class_count = 0);
PointCloud read_xyzl(const std::filesystem::path& path);

// "pcb": packed binary. Magic "PCB1", little-endian uint32 N, then 3N
// little-endian float32 coordinates in row order.
void write_pcb(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_pcb(const std::filesystem::path& path);

// Dispatches on extension (.xyzl / .pcb).
PointCloud read_point_file(const std::filesystem::path& path);

}  // namespace ssbench

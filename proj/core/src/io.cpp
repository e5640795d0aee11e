#include "ssbench/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace ssbench {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
  throw Error(path.string() + ":" + std::to_string(line) + ": " + what);
}

void write_u32_le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32_le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw Error("pcb: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32_le(std::ostream& os, float v) {
  static_assert(sizeof(float) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32_le(os, bits);
}

float read_f32_le(std::istream& is) {
  const std::uint32_t bits = read_u32_le(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void write_xyzl(const std::filesystem::path& path, const PointCloud& cloud,
                int class_count) {
  check_finite(cloud.points, "write_xyzl");
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path.string());
  os.precision(17);
  os << cloud.points.rows() << " " << class_count << "\n";
  for (Eigen::Index i = 0; i < cloud.points.rows(); ++i)
    os << cloud.points(i, 0) << " " << cloud.points(i, 1) << " " << cloud.points(i, 2)
       << "\n";
  if (cloud.label) os << "label " << *cloud.label << "\n";
  if (!os) throw Error("write failed: " + path.string());
}

PointCloud read_xyzl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open: " + path.string());
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(is, line)) parse_fail(path, 1, "missing header");
  ++lineno;
  std::istringstream header(line);
  long long n = 0, class_count = 0;
  if (!(header >> n >> class_count) || n < 1 || class_count < 0)
    parse_fail(path, lineno, "malformed header, expected \"N C\"");

  PointCloud cloud;
  cloud.points.resize(n, 3);
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(is, line)) parse_fail(path, lineno + 1, "unexpected end of file");
    ++lineno;
    std::istringstream row(line);
    double x, y, z;
    if (!(row >> x >> y >> z))
      parse_fail(path, lineno, "non-numeric coordinate");
    std::string extra;
    if (row >> extra) parse_fail(path, lineno, "trailing token \"" + extra + "\"");
    cloud.points(i, 0) = x;
    cloud.points(i, 1) = y;
    cloud.points(i, 2) = z;
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream tail(line);
    std::string tag;
    tail >> tag;
    if (tag != "label") parse_fail(path, lineno, "unexpected line \"" + line + "\"");
    long long label = -1;
    if (!(tail >> label) || label < 0) parse_fail(path, lineno, "malformed label");
    if (class_count > 0 && label >= class_count)
      parse_fail(path, lineno, "label out of range");
    cloud.label = static_cast<int>(label);
  }
  check_finite(cloud.points, ("read_xyzl " + path.string()).c_str());
  cloud.id = path.stem().string();
  return cloud;
}

void write_pcb(const std::filesystem::path& path, const PointCloud& cloud) {
  check_finite(cloud.points, "write_pcb");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path.string());
  os.write("PCB1", 4);
  write_u32_le(os, static_cast<std::uint32_t>(cloud.points.rows()));
  for (Eigen::Index i = 0; i < cloud.points.rows(); ++i)
    for (int c = 0; c < 3; ++c) write_f32_le(os, static_cast<float>(cloud.points(i, c)));
  if (!os) throw Error("write failed: " + path.string());
}

PointCloud read_pcb(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PCB1", 4) != 0)
    throw Error(path.string() + ": byte 0: bad magic, expected PCB1");
  const std::uint32_t n = read_u32_le(is);
  if (n < 1) throw Error(path.string() + ": byte 4: zero point count");
  PointCloud cloud;
  cloud.points.resize(n, 3);
  for (std::uint32_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) {
      if (is.peek() == EOF)
        throw Error(path.string() + ": byte " +
                    std::to_string(8 + (static_cast<std::size_t>(i) * 3 + c) * 4) +
                    ": truncated payload");
      cloud.points(i, c) = static_cast<double>(read_f32_le(is));
    }
  check_finite(cloud.points, ("read_pcb " + path.string()).c_str());
  cloud.id = path.stem().string();
  return cloud;
}

PointCloud read_point_file(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".xyzl") return read_xyzl(path);
  if (ext == ".pcb") return read_pcb(path);
  throw Error("unsupported point file extension: " + path.string());
}

}  // namespace ssbench

#include "concord/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "concord/config.hpp"

namespace concord {

namespace fs = std::filesystem;

namespace {

constexpr char kPcldMagic[5] = {'P', 'C', 'L', 'D', '1'};

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

template <typename T>
void put(std::ostream& os, T value) {
  value = to_little(value);
  os.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& is, const fs::path& path) {
  T value;
  if (!is.read(reinterpret_cast<char*>(&value), sizeof value)) {
    throw Error(ErrorCode::IoError, "truncated file " + path.string());
  }
  return to_little(value);
}

void check_finite(const PointCloud& cloud, const fs::path& path) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!is_finite(cloud[i])) {
      throw Error(ErrorCode::InvalidCoordinate, path.string() + " point " + std::to_string(i));
    }
  }
}

}  // namespace

PointCloud read_xyz(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  PointCloud cloud;
  cloud.id = path.stem().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::vector<double> values;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == ',' || *p == '\r')) ++p;
      if (p == end) break;
      if (*p == '+') ++p;  // from_chars rejects a leading '+'
      double v;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        throw Error(ErrorCode::IoError, path.string() + ":" + std::to_string(lineno) + ": bad number");
      }
      values.push_back(v);
      p = next;
    }
    if (values.empty()) continue;
    if (values.size() != 3) {
      throw Error(ErrorCode::IoError, path.string() + ":" + std::to_string(lineno) + ": expected 3 coordinates");
    }
    const Point3 pt{values[0], values[1], values[2]};
    cloud.points.push_back(pt);
  }
  check_finite(cloud, path);
  return cloud;
}

void write_xyz(const PointCloud& cloud, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& p : cloud.points) {
    out << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << format_double(p[2]) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

PointCloud read_pcld(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  char magic[sizeof kPcldMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kPcldMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::IoError, path.string() + " is not a PCLD1 file");
  }
  const auto count = get<std::uint64_t>(in, path);
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uint64_t>(in.tellg());
  if (bytes != sizeof magic + 8 + count * 12) {
    throw Error(ErrorCode::IoError, path.string() + ": size disagrees with point count");
  }
  in.seekg(sizeof magic + 8);
  PointCloud cloud;
  cloud.id = path.stem().string();
  cloud.points.resize(count);
  for (auto& p : cloud.points) {
    for (auto& c : p) c = get<float>(in, path);
  }
  check_finite(cloud, path);
  return cloud;
}

void write_pcld(const PointCloud& cloud, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kPcldMagic, sizeof kPcldMagic);
  put<std::uint64_t>(out, cloud.size());
  for (const auto& p : cloud.points) {
    for (double c : p) put(out, static_cast<float>(c));
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

PointCloud read_cloud(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".xyz") return read_xyz(path);
  if (ext == ".pcld") return read_pcld(path);
  throw Error(ErrorCode::IoError, "unknown cloud format " + path.string());
}

std::vector<PointCloud> load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "dataset directory " + dir.string() + " not found");
  std::vector<PointCloud> out;
  const fs::path manifest = dir / kDatasetManifest;
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json j;
    try {
      in >> j;
      for (const auto& entry : j.at("clouds")) {
        PointCloud c = read_cloud(dir / entry.at("file").get<std::string>());
        c.id = entry.at("id").get<std::string>();
        out.push_back(std::move(c));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::IoError, manifest.string() + ": " + e.what());
    }
  } else {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".xyz" || ext == ".pcld")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(read_cloud(f));
  }
  if (out.empty()) throw Error(ErrorCode::IoError, "dataset " + dir.string() + " holds no clouds");
  for (const auto& c : out) {
    if (c.empty()) throw Error(ErrorCode::EmptyCloud, "cloud " + c.id);
  }
  return out;
}

void save_dataset(const std::vector<PointCloud>& clouds, const fs::path& dir, CloudFormat format) {
  fs::create_directories(dir);
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const auto& c = clouds[i];
    std::string stem = c.id.empty() ? "cloud-" + std::to_string(i) : c.id;
    std::replace(stem.begin(), stem.end(), '/', '_');
    const std::string file = stem + (format == CloudFormat::Xyz ? ".xyz" : ".pcld");
    if (format == CloudFormat::Xyz) {
      write_xyz(c, dir / file);
    } else {
      write_pcld(c, dir / file);
    }
    list.push_back({{"id", c.id.empty() ? stem : c.id}, {"file", file}});
  }
  std::ofstream out(dir / kDatasetManifest);
  out << nlohmann::json{{"clouds", list}}.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "cannot write dataset manifest in " + dir.string());
}

}  // namespace concord

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "concord/point_cloud.hpp"

namespace concord {

// XYZ text: one "x y z" line per point. Blank lines and '#' comments are
// ignored. Written at full double precision.
PointCloud read_xyz(const std::filesystem::path& path);
void write_xyz(const PointCloud& cloud, const std::filesystem::path& path);

// Packed binary: "PCLD1", u64 LE point count, then float32 LE triples.
PointCloud read_pcld(const std::filesystem::path& path);
void write_pcld(const PointCloud& cloud, const std::filesystem::path& path);

// Dispatches on the extension (.xyz or .pcld). The cloud id is the file stem.
PointCloud read_cloud(const std::filesystem::path& path);

enum class CloudFormat { Xyz, Pcld };

inline constexpr const char* kDatasetManifest = "dataset.json";

/// A dataset is a directory of cloud files. When dataset.json is present it
/// lists {"id", "file"} entries in order; otherwise every .xyz/.pcld file is
/// loaded in sorted filename order.
std::vector<PointCloud> load_dataset(const std::filesystem::path& dir);

/// Writes one file per cloud plus dataset.json.
void save_dataset(const std::vector<PointCloud>& clouds, const std::filesystem::path& dir, CloudFormat format);

}  // namespace concord

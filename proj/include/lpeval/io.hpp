#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpeval/fusion.hpp"
#include "lpeval/labels.hpp"
#include "lpeval/scenario.hpp"

namespace lpeval::io {

std::string fnv1a_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

// Label files hold one little-endian uint32 per point in the packed
// class * 1000 + instance encoding; point files hold four little-endian
// float32 (x, y, z, intensity) per point.
std::vector<std::uint32_t> read_label_file(const std::filesystem::path& path);
void write_label_file(const std::filesystem::path& path,
                      std::span<const std::uint32_t> labels);
ScanLabels read_scan_labels(const std::filesystem::path& path);
void write_scan_labels(const std::filesystem::path& path, const ScanLabels& scan);

PointCloud read_point_cloud(const std::filesystem::path& path);
void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

ClassMap read_class_map(const std::filesystem::path& path);
void write_class_map(const std::filesystem::path& path, const ClassMap& map);

// Maps arbitrary track strings in box files to stable instance ids, scoped
// to one sequence.
struct TrackRegistry {
  std::map<std::string, InstanceId> ids;
  InstanceId next = 1;

  InstanceId id_for(const std::string& track);
};

std::vector<Box3D> read_boxes(const std::filesystem::path& path, const ClassMap& map,
                              TrackRegistry* registry = nullptr);
void write_boxes(const std::filesystem::path& path, std::span<const Box3D> boxes,
                 const ClassMap& map);

struct ManifestScan {
  std::string token;
  std::string gt;      // paths relative to the manifest directory
  std::string pred;
  std::string points;  // optional, fusion only
  std::string boxes;   // optional, fusion only
};

struct ManifestSequence {
  std::string id;
  std::vector<ManifestScan> scans;
};

struct Manifest {
  std::vector<ManifestSequence> sequences;
  std::filesystem::path root;
  std::string digest;

  std::filesystem::path resolve(const std::string& relative) const {
    return root / relative;
  }
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

ScenarioSpec read_scenario_spec(const std::filesystem::path& path);

}  // namespace lpeval::io

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lpeval/labels.hpp"

namespace lpeval {

// x, y, z, intensity per point, meters.
struct PointCloud {
  std::vector<float> data;

  std::size_t size() const noexcept { return data.size() / 4; }
  float x(std::size_t i) const { return data[4 * i]; }
  float y(std::size_t i) const { return data[4 * i + 1]; }
  float z(std::size_t i) const { return data[4 * i + 2]; }
  float intensity(std::size_t i) const { return data[4 * i + 3]; }
  void push_back(float px, float py, float pz, float it = 0.f) {
    data.insert(data.end(), {px, py, pz, it});
  }
};

// 7-DoF oriented box. `size` spans width (box x axis), length (box y axis)
// and height (z); yaw rotates about z and is normalized to (-pi, pi].
struct Box3D {
  std::array<double, 3> center{};
  std::array<double, 3> size{};
  double yaw = 0.0;
  ClassId class_id = 0;
  double score = 1.0;
  std::optional<InstanceId> track_id;

  double volume() const noexcept { return size[0] * size[1] * size[2]; }
};

double normalize_yaw(double yaw) noexcept;

/// Faces inclusive: a point exactly on a half-extent is inside.
bool point_in_box(const Box3D& box, double x, double y, double z) noexcept;

std::vector<std::uint32_t> points_in_box(const PointCloud& cloud, const Box3D& box);

/// Ground-truth fusion: a point inside exactly one box of its own semantic
/// class takes that box's track id as instance; points inside two or more
/// qualifying boxes become ignore ("noise"). Boxes must carry track ids and
/// thing classes.
ScanLabels fuse_gt(const ScanLabels& semantic, const PointCloud& cloud,
                   std::span<const Box3D> boxes, const ClassMap& map);

struct FuseOptions {
  double score_threshold = 0.0;
  // Per-class override of score_threshold; index by eval class id.
  std::vector<std::optional<double>> class_thresholds;
};

/// Detection fusion: points inside a box take the box's class and a fresh
/// instance id (its track id when present). Overlaps go to the box with the
/// higher score; ties break on larger volume, then input order.
ScanLabels fuse_pred(const ScanLabels& semantic_pred, const PointCloud& cloud,
                     std::span<const Box3D> boxes, const ClassMap& map,
                     const FuseOptions& options = {});

}  // namespace lpeval

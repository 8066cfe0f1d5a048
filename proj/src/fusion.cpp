#include "lpeval/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace lpeval {

double normalize_yaw(double yaw) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  yaw = std::fmod(yaw, two_pi);
  if (yaw > std::numbers::pi) yaw -= two_pi;
  if (yaw <= -std::numbers::pi) yaw += two_pi;
  return yaw;
}

bool point_in_box(const Box3D& box, double x, double y, double z) noexcept {
  const double dx = x - box.center[0];
  const double dy = y - box.center[1];
  const double dz = z - box.center[2];
  // Rotate into the box frame (by -yaw about z).
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  const double bx = c * dx + s * dy;
  const double by = -s * dx + c * dy;
  return std::abs(bx) <= box.size[0] / 2.0 && std::abs(by) <= box.size[1] / 2.0 &&
         std::abs(dz) <= box.size[2] / 2.0;
}

std::vector<std::uint32_t> points_in_box(const PointCloud& cloud, const Box3D& box) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (point_in_box(box, cloud.x(i), cloud.y(i), cloud.z(i))) {
      out.push_back(static_cast<std::uint32_t>(i));
    }
  }
  return out;
}

namespace {

void check_fusion_boxes(std::span<const Box3D> boxes, const ClassMap& map,
                        bool require_track_ids) {
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    if (!map.is_thing(boxes[b].class_id)) {
      throw EvalError("fusion box " + std::to_string(b) +
                      " does not carry a thing class");
    }
    if (boxes[b].size[0] <= 0 || boxes[b].size[1] <= 0 || boxes[b].size[2] <= 0) {
      throw EvalError("fusion box " + std::to_string(b) + " has a non-positive size");
    }
    if (require_track_ids && !boxes[b].track_id) {
      throw EvalError("ground-truth fusion box " + std::to_string(b) +
                      " carries no track id");
    }
    if (boxes[b].track_id &&
        (*boxes[b].track_id == 0 || *boxes[b].track_id >= kInstanceModulus)) {
      throw EvalError("fusion box " + std::to_string(b) +
                      " has a track id outside [1, 999]");
    }
  }
}

}  // namespace

ScanLabels fuse_gt(const ScanLabels& semantic, const PointCloud& cloud,
                   std::span<const Box3D> boxes, const ClassMap& map) {
  if (semantic.point_count() != cloud.size()) {
    throw EvalError::length_mismatch(semantic.point_count(), cloud.size());
  }
  check_fusion_boxes(boxes, map, /*require_track_ids=*/true);

  ScanLabels out = semantic;
  std::fill(out.instance.begin(), out.instance.end(), 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const ClassId cls = semantic.semantic[i];
    if (!map.is_thing(cls)) continue;
    std::uint32_t hits = 0;
    InstanceId inst = 0;
    for (const Box3D& box : boxes) {
      if (box.class_id != cls) continue;
      if (!point_in_box(box, cloud.x(i), cloud.y(i), cloud.z(i))) continue;
      if (++hits > 1) break;
      inst = *box.track_id;
    }
    if (hits == 1) {
      out.instance[i] = inst;
    } else if (hits > 1) {
      out.semantic[i] = map.ignore_id();
      out.instance[i] = 0;
    }
  }
  return out;
}

ScanLabels fuse_pred(const ScanLabels& semantic_pred, const PointCloud& cloud,
                     std::span<const Box3D> boxes, const ClassMap& map,
                     const FuseOptions& options) {
  if (semantic_pred.point_count() != cloud.size()) {
    throw EvalError::length_mismatch(semantic_pred.point_count(), cloud.size());
  }
  check_fusion_boxes(boxes, map, /*require_track_ids=*/false);

  std::vector<std::size_t> order(boxes.size());
  for (std::size_t b = 0; b < order.size(); ++b) order[b] = b;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (boxes[a].score != boxes[b].score) return boxes[a].score > boxes[b].score;
    return boxes[a].volume() > boxes[b].volume();
  });

  std::set<InstanceId> used;
  for (const Box3D& box : boxes) {
    if (box.track_id) used.insert(*box.track_id);
  }
  InstanceId next_fresh = 1;
  auto fresh_id = [&]() {
    while (used.contains(next_fresh)) next_fresh++;
    if (next_fresh >= kInstanceModulus) {
      throw EvalError("ran out of instance ids for fused boxes (max 999)");
    }
    used.insert(next_fresh);
    return next_fresh;
  };

  ScanLabels out = semantic_pred;
  std::fill(out.instance.begin(), out.instance.end(), 0);
  std::vector<bool> claimed(cloud.size(), false);
  for (std::size_t b : order) {
    const Box3D& box = boxes[b];
    const double threshold =
        box.class_id < options.class_thresholds.size() &&
                options.class_thresholds[box.class_id]
            ? *options.class_thresholds[box.class_id]
            : options.score_threshold;
    if (box.score < threshold) continue;
    const InstanceId inst = box.track_id ? *box.track_id : fresh_id();
    for (std::uint32_t i : points_in_box(cloud, box)) {
      if (claimed[i]) continue;
      claimed[i] = true;
      out.semantic[i] = box.class_id;
      out.instance[i] = inst;
    }
  }
  return out;
}

}  // namespace lpeval

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lpeval/errors.hpp"

namespace lpeval {

using ClassId = std::uint32_t;
using InstanceId = std::uint32_t;

// Packed per-point label: class_id * 1000 + instance_id. Instance ids live in
// [0, 999]; instance 0 means "no instance" (stuff, ignore, or unassigned).
constexpr std::uint32_t kInstanceModulus = 1000;

constexpr std::pair<ClassId, InstanceId> decode_panoptic(std::uint32_t raw) noexcept {
  return {raw / kInstanceModulus, raw % kInstanceModulus};
}

/// Inverse of decode_panoptic; throws if instance_id does not fit the encoding.
std::uint32_t encode_panoptic(ClassId class_id, InstanceId instance_id);

struct ClassEntry {
  std::uint32_t raw_id = 0;
  ClassId eval_id = 0;
  std::string name;
  bool thing = false;
  bool ignore = false;
};

// Raw-to-evaluation class remapping. Evaluation ids are contiguous in
// [0, num_classes()); a single reserved id >= num_classes() marks points that
// are excluded from every metric.
class ClassMap {
 public:
  ClassMap(std::vector<ClassEntry> entries, ClassId num_eval_classes,
           std::optional<ClassId> ignore_id = std::nullopt);

  ClassId num_classes() const noexcept { return num_classes_; }
  ClassId ignore_id() const noexcept { return ignore_id_; }

  ClassId eval_id(std::uint32_t raw_id) const;

  bool is_ignore(ClassId eval_id) const noexcept { return eval_id >= num_classes_; }
  bool is_thing(ClassId eval_id) const noexcept {
    return eval_id < num_classes_ && thing_[eval_id];
  }
  bool is_stuff(ClassId eval_id) const noexcept {
    return eval_id < num_classes_ && !thing_[eval_id];
  }

  const std::string& class_name(ClassId eval_id) const;
  const std::vector<ClassEntry>& entries() const noexcept { return entries_; }

  std::vector<ClassId> thing_classes() const;
  std::vector<ClassId> stuff_classes() const;

  /// Smallest raw id mapping to the class (pass ignore_id() for the ignore
  /// class). Lets eval-space labels be written back into raw label files.
  std::uint32_t raw_representative(ClassId eval_id) const;

  /// Identity map over `num_classes` evaluation classes. Ids listed in
  /// `thing_ids` become thing classes, everything else stuff.
  static ClassMap identity(ClassId num_classes, std::span<const ClassId> thing_ids);

 private:
  std::vector<ClassEntry> entries_;
  std::unordered_map<std::uint32_t, ClassId> raw_to_eval_;
  std::vector<bool> thing_;
  std::vector<std::string> names_;  // num_classes_ entries + ignore name
  std::vector<std::uint32_t> raw_rep_;  // num_classes_ entries + ignore slot
  ClassId num_classes_ = 0;
  ClassId ignore_id_ = 0;
};

// Per-point labels of one scan in evaluation class space. Instance is 0 for
// stuff and ignore points.
struct ScanLabels {
  std::vector<ClassId> semantic;
  std::vector<InstanceId> instance;

  std::size_t point_count() const noexcept { return semantic.size(); }
};

// Temporally ordered scans of one sequence. Instance ids are consistent
// across the sequence: the same physical object keeps its id.
struct SequenceLabels {
  std::string sequence_id;
  std::vector<std::string> scan_tokens;
  std::vector<ScanLabels> scans;
};

struct Segment {
  ClassId class_id = 0;
  InstanceId instance_id = 0;
  std::vector<std::uint32_t> point_indices;  // sorted, non-empty
};

ScanLabels decode_scan(std::span<const std::uint32_t> packed);
std::vector<std::uint32_t> encode_scan(const ScanLabels& scan);

/// Remaps raw class ids to evaluation ids. Points mapped to the ignore class
/// lose their instance id; stuff instances are zeroed as well.
ScanLabels remap(const ScanLabels& scan, const ClassMap& map);

/// One segment per (thing class, instance != 0) pair, in (class, instance)
/// order. Stuff and ignore points belong to no segment.
std::vector<Segment> extract_segments(const ScanLabels& scan, const ClassMap& map);

/// Keeps segments with strictly more than `threshold` points.
std::vector<Segment> filter_min_points(std::vector<Segment> segments,
                                       std::size_t threshold);

}  // namespace lpeval

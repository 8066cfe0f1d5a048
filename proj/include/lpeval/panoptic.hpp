#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lpeval/confusion.hpp"
#include "lpeval/labels.hpp"

namespace lpeval {

struct MatchOptions {
  // Instances are kept only with strictly more than min_points points.
  std::size_t min_points = 15;
  bool filter_gt = true;
  bool filter_pred = true;
};

struct SegmentKey {
  ClassId class_id = 0;
  InstanceId instance_id = 0;  // 0 for per-class stuff unions
  auto operator<=>(const SegmentKey&) const = default;
};

struct SegmentRef {
  SegmentKey key;
  std::uint64_t size = 0;  // raw point count
};

struct MatchedPair {
  SegmentKey gt;
  SegmentKey pred;
  std::uint64_t intersection = 0;
  double iou = 0.0;
};

// Per-scan matching outcome. Thing occurrence lists carry the surviving
// (post-filter) segments with their match state, which the tracking layer
// consumes.
struct ScanMatch {
  std::vector<MatchedPair> tp;
  std::vector<SegmentRef> fn;  // unmatched ground-truth segments
  std::vector<SegmentRef> fp;  // unmatched predictions kept after void removal

  struct ThingOcc {
    SegmentKey key;
    std::uint64_t size = 0;
    std::optional<InstanceId> matched;
  };
  std::vector<ThingOcc> gt_things;
  std::vector<ThingOcc> pred_things;
};

/// Matches ground-truth and predicted segments of one scan at IoU > 0.5.
/// Thing segments are (class, instance) groups, stuff segments per-class
/// unions. Points whose ground truth is ignored — including points of
/// ground-truth instances removed by the min-point filter — are excluded
/// from every IoU, and predictions with more than half their points on such
/// ignored ground truth are dropped before FP counting.
ScanMatch match_scan(const ScanLabels& gt, const ScanLabels& pred,
                     const ClassMap& map, const MatchOptions& options = {});

// Mergeable per-class PQ tallies.
class PQStats {
 public:
  struct ClassStats {
    double iou_sum = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
  };

  explicit PQStats(ClassId num_classes) : per_class_(num_classes) {}

  void accumulate(const ScanMatch& match);
  void merge(const PQStats& other);

  ClassId num_classes() const noexcept {
    return static_cast<ClassId>(per_class_.size());
  }
  const ClassStats& for_class(ClassId c) const { return per_class_.at(c); }
  std::span<const ClassStats> classes() const noexcept { return per_class_; }

 private:
  std::vector<ClassStats> per_class_;
};

struct ClassPQ {
  bool present = false;  // tp + fp + fn > 0
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
};

struct PanopticResult {
  std::vector<ClassPQ> per_class;
  double pq = 0.0, sq = 0.0, rq = 0.0;
  std::optional<double> pq_things, sq_things, rq_things;
  std::optional<double> pq_stuff, sq_stuff, rq_stuff;
  double pq_dagger = 0.0;
};

/// Aggregates accumulated stats into per-class and mean scores. Means run
/// over present classes only. PQ-dagger scores stuff classes by their plain
/// semantic IoU, which is why the per-class semantic IoUs are required.
PanopticResult finalize_pq(const PQStats& stats, const ClassMap& map,
                           std::span<const ClassIoU> semantic_iou);

}  // namespace lpeval

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lpeval/panoptic.hpp"

namespace lpeval {

// Whether a gap in a track's ground-truth presence itself counts as an ID
// switch (kCount) or only the ids on either side are compared (kSkip).
enum class IdsGapMode { kSkip, kCount };

// Track-quality mean: over all tracks of the split, or per sequence first.
enum class TrackMean { kGlobal, kPerSequence };

struct TrackingOptions {
  MatchOptions match;
  IdsGapMode gap_mode = IdsGapMode::kSkip;
  TrackMean track_mean = TrackMean::kGlobal;
};

// One ground-truth track: its surviving per-frame occurrences in temporal
// order, each with the predicted instance id it matched (IoU > 0.5), if any.
struct TrackRecord {
  InstanceId track_id = 0;
  ClassId class_id = 0;
  struct Occurrence {
    int frame = 0;
    std::optional<InstanceId> matched_pred;
  };
  std::vector<Occurrence> frames;
};

// Association counts of one sequence. TPA(p, g) counts frames where track g
// matched prediction p; pred_occurrences counts surviving predicted thing
// segment occurrences per id, so FPA(p, g) = occurrences(p) - TPA(p, g).
struct AssocTally {
  std::map<std::pair<InstanceId, InstanceId>, std::int64_t> tpa;  // (pred, gt)
  std::map<InstanceId, std::int64_t> pred_occurrences;
};

// Point-level 4D tubes over one sequence, class-agnostic across surviving
// thing points. Sizes are summed per-frame mask sizes.
struct TubeIndex {
  std::map<InstanceId, std::uint64_t> gt_size;
  std::map<InstanceId, std::uint64_t> pred_size;
  std::map<std::pair<InstanceId, InstanceId>, std::uint64_t> intersection;  // (gt, pred)
};

struct FrameMatches {
  std::vector<ScanMatch> frames;
  std::vector<TrackRecord> tracks;  // sorted by track id
  AssocTally tally;
  TubeIndex tubes;
};

FrameMatches match_frames(const SequenceLabels& gt, const SequenceLabels& pred,
                          const ClassMap& map, const TrackingOptions& opts = {});

/// AS(g): mean over the track's frames of TPA-weighted association IoU
/// against every prediction id that ever matched the track.
double compute_as(const TrackRecord& track, const AssocTally& tally);

struct IdSwitches {
  std::int64_t ids = 0;
  std::int64_t n_ids = 1;  // max(track length - 1, 1)
};

/// Counts consecutive-occurrence pairs that are unmatched on either side or
/// matched with different ids.
IdSwitches compute_ids(const TrackRecord& track, IdsGapMode mode = IdsGapMode::kSkip);

/// TQ(g) = sqrt((1 - IDS/N_IDS) * AS(g)).
double track_quality(double as_score, const IdSwitches& switches);

/// Harmonic mean of PQ and TQ; zero when both are zero.
double compute_pat(double pq, double tq);

struct TrackDiag {
  std::string sequence_id;
  InstanceId track_id = 0;
  ClassId class_id = 0;
  std::int64_t length = 0;
  double as_score = 0.0;
  std::int64_t ids = 0;
  std::int64_t n_ids = 1;
  double tq = 0.0;
};

/// Mean TQ over tracks; absent when there are no tracks.
std::optional<double> compute_tq(std::span<const TrackDiag> tracks, TrackMean mode);

/// PTQ: per class (sum of matched IoU - id switches) / (TP + 0.5 FP + 0.5 FN),
/// clamped at zero, averaged over present classes. Stuff classes carry no
/// switches.
double compute_ptq(const PQStats& stats, std::span<const std::int64_t> ids_per_class,
                   const ClassMap& map);

/// Association score of each ground-truth tube, ordered by tube id.
std::vector<double> tube_association_scores(const TubeIndex& tubes);

struct LstqResult {
  double lstq = 0.0;
  double s_cls = 0.0;
  std::optional<double> s_assoc;  // absent without ground-truth tubes
};

/// LSTQ = sqrt(S_assoc * S_cls); equals S_cls when no tube exists.
LstqResult compute_lstq(std::span<const double> tube_scores,
                        const ConfusionMatrix& confusion);

// Mergeable per-sequence partial of the tracking evaluation.
struct SequenceStats {
  SequenceStats(std::string id, ClassId num_classes)
      : sequence_id(std::move(id)),
        pq_stats(num_classes),
        confusion(num_classes),
        ptq_ids(num_classes, 0) {}

  std::string sequence_id;
  PQStats pq_stats;
  ConfusionMatrix confusion;
  std::vector<std::int64_t> ptq_ids;
  std::vector<TrackDiag> tracks;
  std::vector<double> tube_scores;
};

SequenceStats evaluate_sequence(const SequenceLabels& gt, const SequenceLabels& pred,
                                const ClassMap& map, const TrackingOptions& opts = {});

struct TrackingResult {
  double pat = 0.0;
  double pq = 0.0;
  double ptq = 0.0;
  double lstq = 0.0;
  double s_cls = 0.0;
  std::optional<double> tq;       // absent without ground-truth tracks; PAT = PQ then
  std::optional<double> s_assoc;  // absent without ground-truth tubes
  std::int64_t total_ids = 0;
  std::vector<TrackDiag> tracks;
};

TrackingResult finalize_tracking(std::span<const SequenceStats> sequences,
                                 const ClassMap& map, const TrackingOptions& opts = {});

}  // namespace lpeval

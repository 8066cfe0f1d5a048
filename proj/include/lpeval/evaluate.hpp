#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lpeval/confusion.hpp"
#include "lpeval/io.hpp"
#include "lpeval/panoptic.hpp"
#include "lpeval/tracking.hpp"

namespace lpeval {

struct EvalOptions {
  MatchOptions match;
  IdsGapMode gap_mode = IdsGapMode::kSkip;
  TrackMean track_mean = TrackMean::kGlobal;
  // 0 resolves LPEVAL_WORKERS, then hardware concurrency; 1 runs the serial
  // reference path.
  int workers = 0;
};

int resolve_workers(int requested);

// A dataset the evaluators pull scan pairs from. `load` must be safe to call
// concurrently for distinct (sequence, scan) indices and must yield labels in
// evaluation class space.
struct DatasetView {
  struct Sequence {
    std::string id;
    std::vector<std::string> tokens;
  };
  std::vector<Sequence> sequences;
  std::function<void(std::size_t seq, std::size_t scan, ScanLabels& gt, ScanLabels& pred)>
      load;

  std::size_t total_scans() const;
};

/// In-memory dataset over parallel gt/pred sequences.
DatasetView memory_dataset(const std::vector<SequenceLabels>* gt,
                           const std::vector<SequenceLabels>* pred);

/// File-backed dataset: reads the packed label files named by the manifest
/// and remaps them through the class map. Missing files are reported with
/// their token up front.
DatasetView manifest_dataset(const io::Manifest* manifest, const ClassMap* map);

struct SequenceScore {
  std::string id;
  ConfusionMatrix confusion;
  std::optional<PQStats> pq_stats;
  std::optional<PanopticResult> panoptic;  // absent when nothing is present
};

struct SemanticOutcome {
  ConfusionMatrix confusion;
  std::vector<SequenceScore> per_sequence;
};

struct PanopticOutcome {
  PQStats stats;
  ConfusionMatrix confusion;
  PanopticResult result;
  std::vector<SequenceScore> per_sequence;
};

struct TrackingOutcome {
  TrackingResult result;
  ConfusionMatrix confusion;
  PanopticResult panoptic;
  std::vector<SequenceStats> sequence_stats;
  std::vector<std::optional<TrackingResult>> per_sequence;  // aligned with sequence_stats
};

SemanticOutcome evaluate_semantic(const DatasetView& data, const ClassMap& map,
                                  const EvalOptions& options = {});
PanopticOutcome evaluate_panoptic(const DatasetView& data, const ClassMap& map,
                                  const EvalOptions& options = {});
TrackingOutcome evaluate_tracking(const DatasetView& data, const ClassMap& map,
                                  const EvalOptions& options = {});

}  // namespace lpeval

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lpeval/labels.hpp"

namespace lpeval {

enum class PredAction { kKeep, kRelabel, kDrop, kVoid };

struct PredStep {
  PredAction action = PredAction::kKeep;
  InstanceId pred_id = 0;  // used by kRelabel
};

struct TrackSpec {
  InstanceId track_id = 1;
  ClassId class_id = 1;
  int first_frame = 1;  // 1-based, inclusive
  int last_frame = 1;
  int points_per_frame = 20;
};

// A synthetic sequence: disjoint point blocks per instance plus an optional
// stuff background block. The prediction starts as a copy of the ground
// truth; plan entries rewrite it per (track, frame).
struct ScenarioSpec {
  std::string sequence_id = "seq0";
  int frames = 1;
  std::uint64_t seed = 0;
  int background_points = 20;  // 0 disables the stuff background (class 0)
  std::vector<TrackSpec> tracks;
  std::map<std::pair<InstanceId, int>, PredStep> plan;  // (track, frame 1-based)
};

struct ScenarioData {
  SequenceLabels gt;
  SequenceLabels pred;
  ClassMap class_map;
};

/// Class map implied by a spec: class 0 is the stuff background, every class
/// referenced by a track is a thing class, and the id after the largest is
/// the ignore class.
ClassMap scenario_class_map(const ScenarioSpec& spec);

ScanLabels generate_frame(const ScenarioSpec& spec, int frame, bool prediction,
                          const ClassMap& map);

ScenarioData generate(const ScenarioSpec& spec);

/// Applies the same frame permutation (0-based) to both sequences.
void permute_frames(SequenceLabels& gt, SequenceLabels& pred,
                    std::span<const int> permutation);

/// Frames >= split_frame of the track are predicted as new_pred_id.
void split_track(ScenarioSpec& spec, InstanceId track_id, int split_frame,
                 InstanceId new_pred_id);

/// Both tracks are predicted under the single id pred_id.
void transfer_id(ScenarioSpec& spec, InstanceId track_a, InstanceId track_b,
                 InstanceId pred_id);

/// Predicted points of the track become ignore in [first_frame, last_frame].
void void_instances(ScenarioSpec& spec, InstanceId track_id, int first_frame,
                    int last_frame);

/// Seeded random spec for property tests: small frame counts, a handful of
/// tracks, and a mix of keep/relabel/drop/void steps.
ScenarioSpec random_scenario(std::uint64_t seed, int max_frames = 5,
                             int max_tracks = 4, int max_points = 30);

}  // namespace lpeval

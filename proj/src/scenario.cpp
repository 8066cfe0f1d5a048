#include "lpeval/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>

namespace lpeval {
namespace {

const TrackSpec& find_track(const ScenarioSpec& spec, InstanceId track_id) {
  for (const TrackSpec& t : spec.tracks) {
    if (t.track_id == track_id) return t;
  }
  throw EvalError::invalid_plan("unknown track id " + std::to_string(track_id));
}

void validate(const ScenarioSpec& spec) {
  if (spec.frames < 1) throw EvalError::invalid_plan("frame count must be >= 1");
  if (spec.background_points < 0) {
    throw EvalError::invalid_plan("background_points must be >= 0");
  }
  std::set<InstanceId> ids;
  for (const TrackSpec& t : spec.tracks) {
    if (t.track_id == 0 || t.track_id >= kInstanceModulus) {
      throw EvalError::invalid_plan("track id must lie in [1, 999]");
    }
    if (!ids.insert(t.track_id).second) {
      throw EvalError::invalid_plan("duplicate track id " + std::to_string(t.track_id));
    }
    if (t.class_id == 0) {
      throw EvalError::invalid_plan("track class ids start at 1; class 0 is background");
    }
    if (t.first_frame < 1 || t.first_frame > t.last_frame || t.last_frame > spec.frames) {
      throw EvalError::invalid_plan("track " + std::to_string(t.track_id) +
                                    " has an invalid frame range");
    }
    if (t.points_per_frame < 1) {
      throw EvalError::invalid_plan("points_per_frame must be >= 1");
    }
  }
  for (const auto& [key, step] : spec.plan) {
    const TrackSpec& t = find_track(spec, key.first);
    if (key.second < t.first_frame || key.second > t.last_frame) {
      throw EvalError::invalid_plan("plan step for track " + std::to_string(key.first) +
                                    " at frame " + std::to_string(key.second) +
                                    " lies outside the track's presence");
    }
    if (step.action == PredAction::kRelabel &&
        (step.pred_id == 0 || step.pred_id >= kInstanceModulus)) {
      throw EvalError::invalid_plan("relabel target must lie in [1, 999]");
    }
  }
}

}  // namespace

ClassMap scenario_class_map(const ScenarioSpec& spec) {
  ClassId max_class = 0;
  for (const TrackSpec& t : spec.tracks) max_class = std::max(max_class, t.class_id);
  const ClassId num_classes = max_class + 1;

  std::vector<ClassEntry> entries;
  entries.push_back({0, 0, "background", false, false});
  for (ClassId c = 1; c < num_classes; ++c) {
    entries.push_back({c, c, "object" + std::to_string(c), true, false});
  }
  entries.push_back({num_classes, num_classes, "void", false, true});
  return ClassMap(std::move(entries), num_classes);
}

ScanLabels generate_frame(const ScenarioSpec& spec, int frame, bool prediction,
                          const ClassMap& map) {
  ScanLabels out;
  auto emit = [&out](int count, ClassId cls, InstanceId inst) {
    out.semantic.insert(out.semantic.end(), count, cls);
    out.instance.insert(out.instance.end(), count, inst);
  };
  if (spec.background_points > 0) emit(spec.background_points, 0, 0);
  for (const TrackSpec& t : spec.tracks) {
    if (frame < t.first_frame || frame > t.last_frame) continue;
    if (!prediction) {
      emit(t.points_per_frame, t.class_id, t.track_id);
      continue;
    }
    PredStep step;
    if (auto it = spec.plan.find({t.track_id, frame}); it != spec.plan.end()) {
      step = it->second;
    }
    switch (step.action) {
      case PredAction::kKeep:
        emit(t.points_per_frame, t.class_id, t.track_id);
        break;
      case PredAction::kRelabel:
        emit(t.points_per_frame, t.class_id, step.pred_id);
        break;
      case PredAction::kDrop:
        emit(t.points_per_frame, t.class_id, 0);
        break;
      case PredAction::kVoid:
        emit(t.points_per_frame, map.ignore_id(), 0);
        break;
    }
  }
  return out;
}

ScenarioData generate(const ScenarioSpec& spec) {
  validate(spec);
  ScenarioData out{SequenceLabels{}, SequenceLabels{}, scenario_class_map(spec)};
  out.gt.sequence_id = spec.sequence_id;
  out.pred.sequence_id = spec.sequence_id;
  for (int frame = 1; frame <= spec.frames; ++frame) {
    char token[16];
    std::snprintf(token, sizeof(token), "_%03d", frame - 1);
    out.gt.scan_tokens.push_back(spec.sequence_id + token);
    out.pred.scan_tokens.push_back(spec.sequence_id + token);
    out.gt.scans.push_back(generate_frame(spec, frame, false, out.class_map));
    out.pred.scans.push_back(generate_frame(spec, frame, true, out.class_map));
  }
  return out;
}

void permute_frames(SequenceLabels& gt, SequenceLabels& pred,
                    std::span<const int> permutation) {
  const std::size_t n = gt.scans.size();
  if (pred.scans.size() != n || permutation.size() != n) {
    throw EvalError::bad_permutation("permutation size does not match frame count");
  }
  std::vector<bool> seen(n, false);
  for (int p : permutation) {
    if (p < 0 || static_cast<std::size_t>(p) >= n || seen[p]) {
      throw EvalError::bad_permutation("not a bijection on frame indices");
    }
    seen[p] = true;
  }
  auto apply = [&](SequenceLabels& seq) {
    SequenceLabels next;
    next.sequence_id = seq.sequence_id;
    for (int p : permutation) {
      next.scan_tokens.push_back(std::move(seq.scan_tokens[p]));
      next.scans.push_back(std::move(seq.scans[p]));
    }
    seq = std::move(next);
  };
  apply(gt);
  apply(pred);
}

void split_track(ScenarioSpec& spec, InstanceId track_id, int split_frame,
                 InstanceId new_pred_id) {
  const TrackSpec& t = find_track(spec, track_id);
  if (split_frame < t.first_frame || split_frame > t.last_frame) {
    throw EvalError::out_of_range_frame(split_frame);
  }
  for (int f = split_frame; f <= t.last_frame; ++f) {
    spec.plan[{track_id, f}] = {PredAction::kRelabel, new_pred_id};
  }
}

void transfer_id(ScenarioSpec& spec, InstanceId track_a, InstanceId track_b,
                 InstanceId pred_id) {
  for (InstanceId id : {track_a, track_b}) {
    const TrackSpec& t = find_track(spec, id);
    for (int f = t.first_frame; f <= t.last_frame; ++f) {
      spec.plan[{id, f}] = {PredAction::kRelabel, pred_id};
    }
  }
}

void void_instances(ScenarioSpec& spec, InstanceId track_id, int first_frame,
                    int last_frame) {
  const TrackSpec& t = find_track(spec, track_id);
  if (first_frame < t.first_frame || first_frame > last_frame ||
      last_frame > t.last_frame) {
    throw EvalError::out_of_range_frame(first_frame);
  }
  for (int f = first_frame; f <= last_frame; ++f) {
    spec.plan[{track_id, f}] = {PredAction::kVoid, 0};
  }
}

ScenarioSpec random_scenario(std::uint64_t seed, int max_frames, int max_tracks,
                             int max_points) {
  std::mt19937_64 rng(seed);
  auto roll = [&rng](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };

  ScenarioSpec spec;
  spec.seed = seed;
  spec.sequence_id = "rand" + std::to_string(seed);
  spec.frames = 1 + roll(max_frames);
  spec.background_points = roll(21);

  const int n_tracks = 1 + roll(max_tracks);
  for (int i = 0; i < n_tracks; ++i) {
    TrackSpec t;
    t.track_id = static_cast<InstanceId>(i + 1);
    t.class_id = static_cast<ClassId>(1 + roll(2));
    t.first_frame = 1 + roll(spec.frames);
    t.last_frame = t.first_frame + roll(spec.frames - t.first_frame + 1);
    t.points_per_frame = 1 + roll(max_points);
    spec.tracks.push_back(t);
  }
  for (const TrackSpec& t : spec.tracks) {
    for (int f = t.first_frame; f <= t.last_frame; ++f) {
      const int r = roll(10);
      if (r < 5) continue;  // keep
      PredStep step;
      if (r < 8) {
        step.action = PredAction::kRelabel;
        step.pred_id = static_cast<InstanceId>(1 + roll(n_tracks + 2));
      } else if (r < 9) {
        step.action = PredAction::kDrop;
      } else {
        step.action = PredAction::kVoid;
      }
      spec.plan[{t.track_id, f}] = step;
    }
  }
  return spec;
}

}  // namespace lpeval

#pragma once

#include <initializer_list>
#include <random>
#include <utility>

#include "lpeval/labels.hpp"

namespace testutil {

using lpeval::ClassId;
using lpeval::ClassMap;
using lpeval::InstanceId;
using lpeval::ScanLabels;
using lpeval::SequenceLabels;

inline ScanLabels make_scan(std::initializer_list<std::pair<ClassId, InstanceId>> points) {
  ScanLabels out;
  for (const auto& [cls, inst] : points) {
    out.semantic.push_back(cls);
    out.instance.push_back(inst);
  }
  return out;
}

inline void append(ScanLabels& scan, int count, ClassId cls, InstanceId inst) {
  scan.semantic.insert(scan.semantic.end(), count, cls);
  scan.instance.insert(scan.instance.end(), count, inst);
}

// Identity map: class 0 stuff, classes 1..things thing, ignore = things + 1.
inline ClassMap simple_map(ClassId things = 1) {
  std::vector<ClassId> thing_ids;
  for (ClassId c = 1; c <= things; ++c) thing_ids.push_back(c);
  return ClassMap::identity(things + 1, thing_ids);
}

inline int roll(std::mt19937_64& rng, int n) {
  return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

// Random labels over `map`'s classes plus the ignore class. Instance ids are
// drawn from per-class pools so a ground-truth instance id implies its class.
inline ScanLabels random_labels(std::mt19937_64& rng, std::size_t n, const ClassMap& map) {
  const ClassId num = map.num_classes();
  ScanLabels out;
  for (std::size_t i = 0; i < n; ++i) {
    // roughly 1 in 8 points ignored
    const ClassId cls = roll(rng, 8) == 0 ? map.ignore_id()
                                          : static_cast<ClassId>(roll(rng, num));
    InstanceId inst = 0;
    if (map.is_thing(cls)) {
      const int k = roll(rng, 4);  // 0 leaves the point unassigned
      if (k > 0) inst = cls * 16 + static_cast<InstanceId>(k);
    }
    out.semantic.push_back(cls);
    out.instance.push_back(inst);
  }
  return out;
}

// A prediction correlated with gt: most points copied, some re-rolled.
inline ScanLabels mutate_labels(std::mt19937_64& rng, const ScanLabels& gt,
                                const ClassMap& map) {
  ScanLabels out = gt;
  for (std::size_t i = 0; i < out.point_count(); ++i) {
    const int r = roll(rng, 10);
    if (r < 6) continue;  // keep
    if (r < 8) {
      // new instance within the same class pool
      if (map.is_thing(out.semantic[i])) {
        const int k = roll(rng, 4);
        out.instance[i] = k == 0 ? 0 : out.semantic[i] * 16 + static_cast<InstanceId>(k);
      }
    } else {
      const ClassId cls = roll(rng, 8) == 0 ? map.ignore_id()
                                            : static_cast<ClassId>(roll(rng, map.num_classes()));
      out.semantic[i] = cls;
      InstanceId inst = 0;
      if (map.is_thing(cls)) {
        const int k = roll(rng, 4);
        if (k > 0) inst = cls * 16 + static_cast<InstanceId>(k);
      }
      out.instance[i] = inst;
    }
  }
  return out;
}

inline std::pair<SequenceLabels, SequenceLabels> random_sequence(
    std::mt19937_64& rng, const ClassMap& map, int max_frames, int max_points) {
  SequenceLabels gt, pred;
  gt.sequence_id = "rand";
  pred.sequence_id = "rand";
  const int frames = 1 + roll(rng, max_frames);
  const std::size_t points = 1 + static_cast<std::size_t>(roll(rng, max_points));
  for (int f = 0; f < frames; ++f) {
    gt.scan_tokens.push_back("f" + std::to_string(f));
    pred.scan_tokens.push_back("f" + std::to_string(f));
    gt.scans.push_back(random_labels(rng, points, map));
    pred.scans.push_back(mutate_labels(rng, gt.scans.back(), map));
  }
  return {std::move(gt), std::move(pred)};
}

}  // namespace testutil

#include "lpeval/panoptic.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace lpeval {
namespace {

// Instance ids fit in 10 bits under the packed encoding (< 1000).
constexpr std::uint64_t seg_key(ClassId cls, InstanceId inst) {
  return (static_cast<std::uint64_t>(cls) << 10) | inst;
}
constexpr std::uint64_t pair_key(ClassId cls, InstanceId gt_inst, InstanceId pred_inst) {
  return (static_cast<std::uint64_t>(cls) << 20) |
         (static_cast<std::uint64_t>(gt_inst) << 10) | pred_inst;
}
constexpr SegmentKey unkey(std::uint64_t k) {
  return {static_cast<ClassId>(k >> 10), static_cast<InstanceId>(k & 0x3ffu)};
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> sorted_entries(
    const std::unordered_map<std::uint64_t, std::uint64_t>& m) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> v(m.begin(), m.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

ScanMatch match_scan(const ScanLabels& gt, const ScanLabels& pred,
                     const ClassMap& map, const MatchOptions& options) {
  if (gt.point_count() != pred.point_count()) {
    throw EvalError::length_mismatch(gt.point_count(), pred.point_count());
  }
  const std::size_t n = gt.point_count();

  // Raw instance sizes decide which segments the min-point filter drops.
  std::unordered_map<std::uint64_t, std::uint64_t> gt_raw, pred_raw;
  for (std::size_t i = 0; i < n; ++i) {
    if (gt.instance[i] != 0 && map.is_thing(gt.semantic[i])) {
      gt_raw[seg_key(gt.semantic[i], gt.instance[i])]++;
    }
    if (pred.instance[i] != 0 && map.is_thing(pred.semantic[i])) {
      pred_raw[seg_key(pred.semantic[i], pred.instance[i])]++;
    }
  }
  std::unordered_set<std::uint64_t> gt_dropped, pred_dropped;
  if (options.filter_gt) {
    for (const auto& [key, size] : gt_raw) {
      if (size <= options.min_points) gt_dropped.insert(key);
    }
  }
  if (options.filter_pred) {
    for (const auto& [key, size] : pred_raw) {
      if (size <= options.min_points) pred_dropped.insert(key);
    }
  }

  // Segment sizes and same-class intersections, with points on ignored
  // ground truth (ignore class or dropped gt instances) excluded from every
  // IoU term. Stuff classes form one segment per class (instance slot 0).
  std::unordered_map<std::uint64_t, std::uint64_t> gt_size;
  std::unordered_map<std::uint64_t, std::uint64_t> pred_size;
  std::unordered_map<std::uint64_t, std::uint64_t> pred_void;
  std::unordered_map<std::uint64_t, std::uint64_t> inter;
  for (std::size_t i = 0; i < n; ++i) {
    const ClassId gc = gt.semantic[i];
    const InstanceId gi = gt.instance[i];
    const bool g_ignore = map.is_ignore(gc);
    const bool g_thing = !g_ignore && map.is_thing(gc);

    bool g_has = false;
    bool voided = g_ignore;
    std::uint64_t gkey = 0;
    InstanceId g_inst = 0;
    if (g_thing && gi != 0) {
      gkey = seg_key(gc, gi);
      if (gt_dropped.contains(gkey)) {
        voided = true;
      } else {
        g_has = true;
        g_inst = gi;
      }
    } else if (!g_ignore && !g_thing) {
      gkey = seg_key(gc, 0);
      g_has = true;
    }
    if (g_has) gt_size[gkey]++;

    const ClassId pc = pred.semantic[i];
    const InstanceId pi = pred.instance[i];
    if (map.is_ignore(pc)) continue;
    std::uint64_t pkey = 0;
    InstanceId p_inst = 0;
    if (map.is_thing(pc)) {
      if (pi == 0) continue;  // unassigned thing point, belongs to no segment
      pkey = seg_key(pc, pi);
      if (pred_dropped.contains(pkey)) continue;
      p_inst = pi;
    } else {
      pkey = seg_key(pc, 0);
    }
    if (voided) {
      pred_void[pkey]++;
    } else {
      pred_size[pkey]++;
      if (g_has && gc == pc) inter[pair_key(gc, g_inst, p_inst)]++;
    }
  }

  ScanMatch out;
  std::unordered_map<std::uint64_t, InstanceId> gt_matched;   // gt key -> pred inst
  std::unordered_map<std::uint64_t, InstanceId> pred_matched;  // pred key -> gt inst

  for (const auto& [key, intersection] : sorted_entries(inter)) {
    const auto cls = static_cast<ClassId>(key >> 20);
    const auto gi = static_cast<InstanceId>((key >> 10) & 0x3ffu);
    const auto pi = static_cast<InstanceId>(key & 0x3ffu);
    const std::uint64_t gkey = seg_key(cls, gi);
    const std::uint64_t pkey = seg_key(cls, pi);
    const std::uint64_t uni = gt_size[gkey] + pred_size[pkey] - intersection;
    const double iou = static_cast<double>(intersection) / static_cast<double>(uni);
    if (iou > 0.5) {
      if (gt_matched.contains(gkey) || pred_matched.contains(pkey)) {
        throw std::logic_error("matching uniqueness violated at IoU > 0.5");
      }
      gt_matched.emplace(gkey, pi);
      pred_matched.emplace(pkey, gi);
      out.tp.push_back({{cls, gi}, {cls, pi}, intersection, iou});
    }
  }

  for (const auto& [gkey, size] : sorted_entries(gt_size)) {
    const SegmentKey k = unkey(gkey);
    auto it = gt_matched.find(gkey);
    if (it == gt_matched.end()) out.fn.push_back({k, size});
    if (map.is_thing(k.class_id)) {
      out.gt_things.push_back(
          {k, size,
           it == gt_matched.end() ? std::nullopt : std::optional<InstanceId>(it->second)});
    }
  }

  // Unmatched predictions with more than half their points on ignored ground
  // truth are removed rather than counted as false positives.
  std::unordered_map<std::uint64_t, std::uint64_t> pred_all = pred_size;
  for (const auto& [pkey, count] : pred_void) pred_all[pkey] += count;
  for (const auto& [pkey, raw] : sorted_entries(pred_all)) {
    const SegmentKey k = unkey(pkey);
    auto it = pred_matched.find(pkey);
    bool counted = true;
    if (it == pred_matched.end()) {
      auto voided = pred_void.find(pkey);
      const std::uint64_t on_void = voided == pred_void.end() ? 0 : voided->second;
      if (2 * on_void > raw) {
        counted = false;
      } else {
        out.fp.push_back({k, raw});
      }
    }
    if (counted && map.is_thing(k.class_id)) {
      out.pred_things.push_back(
          {k, raw,
           it == pred_matched.end() ? std::nullopt : std::optional<InstanceId>(it->second)});
    }
  }
  return out;
}

void PQStats::accumulate(const ScanMatch& match) {
  for (const MatchedPair& m : match.tp) {
    ClassStats& s = per_class_.at(m.gt.class_id);
    s.iou_sum += m.iou;
    s.tp++;
  }
  for (const SegmentRef& r : match.fn) per_class_.at(r.key.class_id).fn++;
  for (const SegmentRef& r : match.fp) per_class_.at(r.key.class_id).fp++;
}

void PQStats::merge(const PQStats& other) {
  if (other.per_class_.size() != per_class_.size()) {
    throw EvalError("cannot merge PQ stats of different class counts");
  }
  for (std::size_t c = 0; c < per_class_.size(); ++c) {
    per_class_[c].iou_sum += other.per_class_[c].iou_sum;
    per_class_[c].tp += other.per_class_[c].tp;
    per_class_[c].fp += other.per_class_[c].fp;
    per_class_[c].fn += other.per_class_[c].fn;
  }
}

PanopticResult finalize_pq(const PQStats& stats, const ClassMap& map,
                           std::span<const ClassIoU> semantic_iou) {
  const ClassId num = map.num_classes();
  if (stats.num_classes() != num || semantic_iou.size() != num) {
    throw std::logic_error("finalize_pq: class count mismatch");
  }

  PanopticResult out;
  out.per_class.resize(num);

  struct Mean {
    double pq = 0, sq = 0, rq = 0;
    std::size_t n = 0;
  };
  Mean all, things, stuff;
  double dagger_sum = 0.0;
  std::size_t dagger_n = 0;

  for (ClassId c = 0; c < num; ++c) {
    const PQStats::ClassStats& s = stats.for_class(c);
    ClassPQ& r = out.per_class[c];
    r.present = (s.tp + s.fp + s.fn) > 0;
    if (r.present) {
      const double den = static_cast<double>(s.tp) + 0.5 * static_cast<double>(s.fp + s.fn);
      r.pq = s.iou_sum / den;
      r.sq = s.tp > 0 ? s.iou_sum / static_cast<double>(s.tp) : 0.0;
      r.rq = static_cast<double>(s.tp) / den;
      Mean& group = map.is_thing(c) ? things : stuff;
      for (Mean* m : {&all, &group}) {
        m->pq += r.pq;
        m->sq += r.sq;
        m->rq += r.rq;
        m->n++;
      }
    }
    if (map.is_thing(c)) {
      if (r.present) {
        dagger_sum += r.pq;
        dagger_n++;
      }
    } else if (semantic_iou[c].present) {
      dagger_sum += semantic_iou[c].iou;
      dagger_n++;
    }
  }

  if (all.n == 0) throw EvalError::no_present_classes();
  out.pq = all.pq / static_cast<double>(all.n);
  out.sq = all.sq / static_cast<double>(all.n);
  out.rq = all.rq / static_cast<double>(all.n);
  if (things.n > 0) {
    out.pq_things = things.pq / static_cast<double>(things.n);
    out.sq_things = things.sq / static_cast<double>(things.n);
    out.rq_things = things.rq / static_cast<double>(things.n);
  }
  if (stuff.n > 0) {
    out.pq_stuff = stuff.pq / static_cast<double>(stuff.n);
    out.sq_stuff = stuff.sq / static_cast<double>(stuff.n);
    out.rq_stuff = stuff.rq / static_cast<double>(stuff.n);
  }
  out.pq_dagger = dagger_n > 0 ? dagger_sum / static_cast<double>(dagger_n) : 0.0;
  return out;
}

}  // namespace lpeval

#include "lpeval/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace lpeval {
namespace {

constexpr std::uint64_t seg_key(ClassId cls, InstanceId inst) {
  return (static_cast<std::uint64_t>(cls) << 10) | inst;
}

}  // namespace

FrameMatches match_frames(const SequenceLabels& gt, const SequenceLabels& pred,
                          const ClassMap& map, const TrackingOptions& opts) {
  if (gt.scans.size() != pred.scans.size()) {
    throw EvalError::frame_count_mismatch(gt.scans.size(), pred.scans.size());
  }

  FrameMatches out;
  std::map<InstanceId, TrackRecord> records;

  for (std::size_t f = 0; f < gt.scans.size(); ++f) {
    ScanMatch m = match_scan(gt.scans[f], pred.scans[f], map, opts.match);

    std::unordered_set<std::uint64_t> gt_alive, pred_alive;
    for (const ScanMatch::ThingOcc& occ : m.gt_things) {
      gt_alive.insert(seg_key(occ.key.class_id, occ.key.instance_id));
      TrackRecord& r = records[occ.key.instance_id];
      if (r.frames.empty()) {
        r.track_id = occ.key.instance_id;
        r.class_id = occ.key.class_id;
      }
      r.frames.push_back({static_cast<int>(f), occ.matched});
      if (occ.matched) out.tally.tpa[{*occ.matched, occ.key.instance_id}]++;
    }
    for (const ScanMatch::ThingOcc& occ : m.pred_things) {
      pred_alive.insert(seg_key(occ.key.class_id, occ.key.instance_id));
      out.tally.pred_occurrences[occ.key.instance_id]++;
    }

    // Tube memberships, skipping points whose ground truth is ignored or
    // belongs to a filtered-out instance.
    const ScanLabels& g = gt.scans[f];
    const ScanLabels& p = pred.scans[f];
    for (std::size_t i = 0; i < g.point_count(); ++i) {
      const ClassId gc = g.semantic[i];
      const InstanceId gi = g.instance[i];
      const bool g_ignore = map.is_ignore(gc);
      const bool g_thing = !g_ignore && map.is_thing(gc);
      const bool g_tube = g_thing && gi != 0 && gt_alive.contains(seg_key(gc, gi));
      if (g_ignore || (g_thing && gi != 0 && !g_tube)) continue;

      const ClassId pc = p.semantic[i];
      const InstanceId pi = p.instance[i];
      const bool p_tube =
          pi != 0 && map.is_thing(pc) && pred_alive.contains(seg_key(pc, pi));

      if (g_tube) out.tubes.gt_size[gi]++;
      if (p_tube) out.tubes.pred_size[pi]++;
      if (g_tube && p_tube) out.tubes.intersection[{gi, pi}]++;
    }

    out.frames.push_back(std::move(m));
  }

  out.tracks.reserve(records.size());
  for (auto& [id, r] : records) out.tracks.push_back(std::move(r));
  return out;
}

double compute_as(const TrackRecord& track, const AssocTally& tally) {
  if (track.frames.empty()) return 0.0;
  const double len = static_cast<double>(track.frames.size());
  double sum = 0.0;
  for (const auto& [key, tpa] : tally.tpa) {
    if (key.second != track.track_id) continue;
    auto occ_it = tally.pred_occurrences.find(key.first);
    const std::int64_t occurrences =
        occ_it == tally.pred_occurrences.end() ? tpa : occ_it->second;
    const double fna = len - static_cast<double>(tpa);
    const double fpa = static_cast<double>(occurrences - tpa);
    const double iou_a = static_cast<double>(tpa) / (static_cast<double>(tpa) + fna + fpa);
    sum += static_cast<double>(tpa) * iou_a;
  }
  return sum / len;
}

IdSwitches compute_ids(const TrackRecord& track, IdsGapMode mode) {
  IdSwitches out;
  out.n_ids = std::max<std::int64_t>(static_cast<std::int64_t>(track.frames.size()) - 1, 1);
  for (std::size_t i = 1; i < track.frames.size(); ++i) {
    const TrackRecord::Occurrence& a = track.frames[i - 1];
    const TrackRecord::Occurrence& b = track.frames[i];
    bool switched = !a.matched_pred || !b.matched_pred ||
                    *a.matched_pred != *b.matched_pred;
    if (mode == IdsGapMode::kCount && b.frame > a.frame + 1) switched = true;
    if (switched) out.ids++;
  }
  return out;
}

double track_quality(double as_score, const IdSwitches& switches) {
  const double fragmentation =
      1.0 - static_cast<double>(switches.ids) / static_cast<double>(switches.n_ids);
  return std::sqrt(fragmentation * as_score);
}

double compute_pat(double pq, double tq) {
  if (pq + tq <= 0.0) return 0.0;
  return 2.0 * pq * tq / (pq + tq);
}

std::optional<double> compute_tq(std::span<const TrackDiag> tracks, TrackMean mode) {
  if (tracks.empty()) return std::nullopt;
  if (mode == TrackMean::kGlobal) {
    double sum = 0.0;
    for (const TrackDiag& t : tracks) sum += t.tq;
    return sum / static_cast<double>(tracks.size());
  }
  // Per-sequence: mean within each sequence, then across sequences.
  std::map<std::string, std::pair<double, std::int64_t>> by_seq;
  for (const TrackDiag& t : tracks) {
    auto& [sum, n] = by_seq[t.sequence_id];
    sum += t.tq;
    n++;
  }
  double sum = 0.0;
  for (const auto& [id, acc] : by_seq) sum += acc.first / static_cast<double>(acc.second);
  return sum / static_cast<double>(by_seq.size());
}

double compute_ptq(const PQStats& stats, std::span<const std::int64_t> ids_per_class,
                   const ClassMap& map) {
  if (stats.num_classes() != map.num_classes() ||
      ids_per_class.size() != map.num_classes()) {
    throw std::logic_error("compute_ptq: class count mismatch");
  }
  double sum = 0.0;
  std::size_t present = 0;
  for (ClassId c = 0; c < map.num_classes(); ++c) {
    const PQStats::ClassStats& s = stats.for_class(c);
    if (s.tp + s.fp + s.fn == 0) continue;
    const double den = static_cast<double>(s.tp) + 0.5 * static_cast<double>(s.fp + s.fn);
    const double v = (s.iou_sum - static_cast<double>(ids_per_class[c])) / den;
    sum += std::max(v, 0.0);
    present++;
  }
  if (present == 0) throw EvalError::no_present_classes();
  return sum / static_cast<double>(present);
}

std::vector<double> tube_association_scores(const TubeIndex& tubes) {
  std::vector<double> out;
  out.reserve(tubes.gt_size.size());
  for (const auto& [g, g_size] : tubes.gt_size) {
    double sum = 0.0;
    auto it = tubes.intersection.lower_bound({g, 0});
    for (; it != tubes.intersection.end() && it->first.first == g; ++it) {
      const double inter = static_cast<double>(it->second);
      const double p_size = static_cast<double>(tubes.pred_size.at(it->first.second));
      sum += inter * (inter / (p_size + static_cast<double>(g_size) - inter));
    }
    out.push_back(sum / static_cast<double>(g_size));
  }
  return out;
}

LstqResult compute_lstq(std::span<const double> tube_scores,
                        const ConfusionMatrix& confusion) {
  LstqResult out;
  out.s_cls = confusion.miou();
  if (tube_scores.empty()) {
    out.lstq = out.s_cls;
    return out;
  }
  double sum = 0.0;
  for (double s : tube_scores) sum += s;
  out.s_assoc = sum / static_cast<double>(tube_scores.size());
  out.lstq = std::sqrt(*out.s_assoc * out.s_cls);
  return out;
}

SequenceStats evaluate_sequence(const SequenceLabels& gt, const SequenceLabels& pred,
                                const ClassMap& map, const TrackingOptions& opts) {
  FrameMatches fm = match_frames(gt, pred, map, opts);
  SequenceStats out(gt.sequence_id, map.num_classes());

  for (std::size_t f = 0; f < gt.scans.size(); ++f) {
    out.confusion.accumulate(gt.scans[f], pred.scans[f]);
    out.pq_stats.accumulate(fm.frames[f]);
  }

  // PTQ id switches: a matched track whose id differs from its last matched
  // id. Memory persists across unmatched frames.
  std::map<InstanceId, InstanceId> last_matched;
  for (const ScanMatch& frame : fm.frames) {
    for (const ScanMatch::ThingOcc& occ : frame.gt_things) {
      if (!occ.matched) continue;
      auto it = last_matched.find(occ.key.instance_id);
      if (it != last_matched.end() && it->second != *occ.matched) {
        out.ptq_ids[occ.key.class_id]++;
      }
      last_matched[occ.key.instance_id] = *occ.matched;
    }
  }

  for (const TrackRecord& t : fm.tracks) {
    const double as_score = compute_as(t, fm.tally);
    const IdSwitches s = compute_ids(t, opts.gap_mode);
    out.tracks.push_back({gt.sequence_id, t.track_id, t.class_id,
                          static_cast<std::int64_t>(t.frames.size()), as_score, s.ids,
                          s.n_ids, track_quality(as_score, s)});
  }
  out.tube_scores = tube_association_scores(fm.tubes);
  return out;
}

TrackingResult finalize_tracking(std::span<const SequenceStats> sequences,
                                 const ClassMap& map, const TrackingOptions& opts) {
  const ClassId num = map.num_classes();
  PQStats pq_stats(num);
  ConfusionMatrix confusion(num);
  std::vector<std::int64_t> ids(num, 0);
  TrackingResult out;
  std::vector<double> tube_scores;

  for (const SequenceStats& s : sequences) {
    pq_stats.merge(s.pq_stats);
    confusion.merge(s.confusion);
    for (ClassId c = 0; c < num; ++c) ids[c] += s.ptq_ids[c];
    out.tracks.insert(out.tracks.end(), s.tracks.begin(), s.tracks.end());
    tube_scores.insert(tube_scores.end(), s.tube_scores.begin(), s.tube_scores.end());
  }

  const PanopticResult pr = finalize_pq(pq_stats, map, confusion.iou_per_class());
  out.pq = pr.pq;
  out.tq = compute_tq(out.tracks, opts.track_mean);
  out.pat = out.tq ? compute_pat(out.pq, *out.tq) : out.pq;
  out.ptq = compute_ptq(pq_stats, ids, map);

  const LstqResult lstq = compute_lstq(tube_scores, confusion);
  out.lstq = lstq.lstq;
  out.s_cls = lstq.s_cls;
  out.s_assoc = lstq.s_assoc;

  for (const TrackDiag& t : out.tracks) out.total_ids += t.ids;
  return out;
}

}  // namespace lpeval

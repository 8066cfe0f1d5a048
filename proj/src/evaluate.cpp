#include "lpeval/evaluate.hpp"

#include <cstdlib>
#include <exception>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lpeval {
namespace {

struct FlatIndex {
  std::size_t seq;
  std::size_t scan;
};

std::vector<FlatIndex> flatten(const DatasetView& data) {
  std::vector<FlatIndex> out;
  out.reserve(data.total_scans());
  for (std::size_t s = 0; s < data.sequences.size(); ++s) {
    for (std::size_t i = 0; i < data.sequences[s].tokens.size(); ++i) {
      out.push_back({s, i});
    }
  }
  return out;
}

// Runs fn over [0, count). Results must be written to index-owned slots so
// that serial and parallel runs fold identically afterwards.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
#ifdef _OPENMP
  if (workers > 1 && count > 1) {
    std::exception_ptr error;
    #pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        #pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    return;
  }
#else
  (void)workers;
#endif
  for (std::size_t i = 0; i < count; ++i) fn(i);
}

}  // namespace

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LPEVAL_WORKERS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::size_t DatasetView::total_scans() const {
  std::size_t n = 0;
  for (const Sequence& s : sequences) n += s.tokens.size();
  return n;
}

DatasetView memory_dataset(const std::vector<SequenceLabels>* gt,
                           const std::vector<SequenceLabels>* pred) {
  if (gt->size() != pred->size()) {
    throw EvalError("gt and pred sequence counts differ");
  }
  DatasetView out;
  for (std::size_t s = 0; s < gt->size(); ++s) {
    if ((*gt)[s].scans.size() != (*pred)[s].scans.size()) {
      throw EvalError::frame_count_mismatch((*gt)[s].scans.size(),
                                            (*pred)[s].scans.size());
    }
    out.sequences.push_back({(*gt)[s].sequence_id, (*gt)[s].scan_tokens});
  }
  out.load = [gt, pred](std::size_t seq, std::size_t scan, ScanLabels& g,
                        ScanLabels& p) {
    g = (*gt)[seq].scans[scan];
    p = (*pred)[seq].scans[scan];
  };
  return out;
}

DatasetView manifest_dataset(const io::Manifest* manifest, const ClassMap* map) {
  DatasetView out;
  for (const io::ManifestSequence& seq : manifest->sequences) {
    DatasetView::Sequence s{seq.id, {}};
    for (const io::ManifestScan& scan : seq.scans) {
      for (const auto& [role, rel] :
           {std::pair{"gt", &scan.gt}, std::pair{"pred", &scan.pred}}) {
        if (rel->empty()) {
          throw EvalError("scan '" + scan.token + "' lists no " + role + " labels");
        }
        const auto path = manifest->resolve(*rel);
        if (!std::filesystem::exists(path)) {
          throw EvalError("scan '" + scan.token + "': missing file " + path.string());
        }
      }
      s.tokens.push_back(scan.token);
    }
    out.sequences.push_back(std::move(s));
  }
  out.load = [manifest, map](std::size_t seq, std::size_t scan, ScanLabels& g,
                             ScanLabels& p) {
    const io::ManifestScan& m = manifest->sequences[seq].scans[scan];
    g = remap(io::read_scan_labels(manifest->resolve(m.gt)), *map);
    p = remap(io::read_scan_labels(manifest->resolve(m.pred)), *map);
  };
  return out;
}

SemanticOutcome evaluate_semantic(const DatasetView& data, const ClassMap& map,
                                  const EvalOptions& options) {
  const ClassId num = map.num_classes();
  const std::vector<FlatIndex> index = flatten(data);
  std::vector<ConfusionMatrix> partials(index.size(), ConfusionMatrix(num));
  parallel_for(index.size(), resolve_workers(options.workers), [&](std::size_t k) {
    ScanLabels gt, pred;
    data.load(index[k].seq, index[k].scan, gt, pred);
    partials[k].accumulate(gt, pred);
  });

  SemanticOutcome out{ConfusionMatrix(num), {}};
  std::size_t k = 0;
  for (const DatasetView::Sequence& seq : data.sequences) {
    SequenceScore score{seq.id, ConfusionMatrix(num), std::nullopt, std::nullopt};
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) score.confusion.merge(partials[k++]);
    out.confusion.merge(score.confusion);
    out.per_sequence.push_back(std::move(score));
  }
  return out;
}

PanopticOutcome evaluate_panoptic(const DatasetView& data, const ClassMap& map,
                                  const EvalOptions& options) {
  const ClassId num = map.num_classes();
  const std::vector<FlatIndex> index = flatten(data);

  struct Partial {
    PQStats stats;
    ConfusionMatrix confusion;
  };
  std::vector<Partial> partials(index.size(), Partial{PQStats(num), ConfusionMatrix(num)});
  parallel_for(index.size(), resolve_workers(options.workers), [&](std::size_t k) {
    ScanLabels gt, pred;
    data.load(index[k].seq, index[k].scan, gt, pred);
    partials[k].confusion.accumulate(gt, pred);
    partials[k].stats.accumulate(match_scan(gt, pred, map, options.match));
  });

  PanopticOutcome out{PQStats(num), ConfusionMatrix(num), {}, {}};
  std::size_t k = 0;
  for (const DatasetView::Sequence& seq : data.sequences) {
    SequenceScore score{seq.id, ConfusionMatrix(num), PQStats(num), std::nullopt};
    for (std::size_t i = 0; i < seq.tokens.size(); ++i, ++k) {
      score.confusion.merge(partials[k].confusion);
      score.pq_stats->merge(partials[k].stats);
    }
    out.confusion.merge(score.confusion);
    out.stats.merge(*score.pq_stats);
    try {
      score.panoptic = finalize_pq(*score.pq_stats, map, score.confusion.iou_per_class());
    } catch (const EvalError&) {
      // Sequence with nothing present keeps an absent result.
    }
    out.per_sequence.push_back(std::move(score));
  }
  out.result = finalize_pq(out.stats, map, out.confusion.iou_per_class());
  return out;
}

TrackingOutcome evaluate_tracking(const DatasetView& data, const ClassMap& map,
                                  const EvalOptions& options) {
  const ClassId num = map.num_classes();
  const TrackingOptions topts{options.match, options.gap_mode, options.track_mean};

  std::vector<std::optional<SequenceStats>> partials(data.sequences.size());
  parallel_for(data.sequences.size(), resolve_workers(options.workers),
               [&](std::size_t s) {
                 const DatasetView::Sequence& seq = data.sequences[s];
                 SequenceLabels gt, pred;
                 gt.sequence_id = seq.id;
                 pred.sequence_id = seq.id;
                 gt.scan_tokens = seq.tokens;
                 pred.scan_tokens = seq.tokens;
                 gt.scans.resize(seq.tokens.size());
                 pred.scans.resize(seq.tokens.size());
                 for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
                   data.load(s, i, gt.scans[i], pred.scans[i]);
                 }
                 partials[s] = evaluate_sequence(gt, pred, map, topts);
               });

  TrackingOutcome out{{}, ConfusionMatrix(num), {}, {}, {}};
  PQStats merged(num);
  for (std::optional<SequenceStats>& p : partials) {
    merged.merge(p->pq_stats);
    out.confusion.merge(p->confusion);
    out.sequence_stats.push_back(std::move(*p));
  }
  out.panoptic = finalize_pq(merged, map, out.confusion.iou_per_class());
  out.result = finalize_tracking(out.sequence_stats, map, topts);
  for (const SequenceStats& s : out.sequence_stats) {
    try {
      out.per_sequence.push_back(finalize_tracking({&s, 1}, map, topts));
    } catch (const EvalError&) {
      out.per_sequence.push_back(std::nullopt);
    }
  }
  return out;
}

}  // namespace lpeval

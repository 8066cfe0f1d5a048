#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lpeval/evaluate.hpp"
#include "lpeval/io.hpp"
#include "lpeval/report.hpp"
#include "lpeval/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lpeval;

namespace {

struct MetricArgs {
  std::string manifest;
  std::string classmap;
  std::string out;
  int min_points = 15;
  std::string apply_filter_to = "both";
  std::string ids_gap_mode = "skip";
  std::string track_mean = "global";
  int parallelism = 0;
};

void add_common_options(CLI::App* cmd, MetricArgs& args, bool tracking) {
  cmd->add_option("manifest", args.manifest, "dataset manifest JSON")->required();
  cmd->add_option("--classmap", args.classmap, "class map JSON")->required();
  cmd->add_option("--out", args.out, "write the JSON report here");
  cmd->add_option("--min-points", args.min_points,
                  "keep instances with strictly more points than this")
      ->capture_default_str();
  cmd->add_option("--apply-filter-to", args.apply_filter_to,
                  "apply the min-point filter to gt, pred, or both")
      ->check(CLI::IsMember({"gt", "pred", "both"}))
      ->capture_default_str();
  if (tracking) {
    cmd->add_option("--ids-gap-mode", args.ids_gap_mode,
                    "whether a ground-truth presence gap counts as an id switch")
        ->check(CLI::IsMember({"skip", "count"}))
        ->capture_default_str();
    cmd->add_option("--track-mean", args.track_mean, "TQ mean over tracks")
        ->check(CLI::IsMember({"global", "per-sequence"}))
        ->capture_default_str();
  }
  cmd->add_option("--parallelism", args.parallelism,
                  "worker count; 0 = LPEVAL_WORKERS or hardware, 1 = serial");
}

EvalOptions to_options(const MetricArgs& args) {
  EvalOptions opts;
  opts.match.min_points = static_cast<std::size_t>(args.min_points);
  opts.match.filter_gt = args.apply_filter_to != "pred";
  opts.match.filter_pred = args.apply_filter_to != "gt";
  opts.gap_mode = args.ids_gap_mode == "count" ? IdsGapMode::kCount : IdsGapMode::kSkip;
  opts.track_mean = args.track_mean == "per-sequence" ? TrackMean::kPerSequence
                                                      : TrackMean::kGlobal;
  opts.workers = args.parallelism;
  return opts;
}

// Parallelism is execution detail, not configuration: it never changes the
// numbers, so it stays out of both the recorded options and the digest.
json options_json(const MetricArgs& args, bool tracking) {
  json j{{"min_points", args.min_points}, {"apply_filter_to", args.apply_filter_to}};
  if (tracking) {
    j["ids_gap_mode"] = args.ids_gap_mode;
    j["track_mean"] = args.track_mean;
  }
  return j;
}

int emit_report(const MetricArgs& args, MetricReport& report) {
  report.meta.created_utc = utc_timestamp();
  std::cout << render_report(report);
  if (!args.out.empty()) {
    write_report(args.out, report);
    std::cout << "report written to " << args.out << "\n";
  } else {
    std::cout << report_to_json(report).dump(2) << "\n";
  }
  return 0;
}

int run_metric(const std::string& command, const MetricArgs& args) {
  const io::Manifest manifest = io::read_manifest(args.manifest);
  const ClassMap map = io::read_class_map(args.classmap);
  const DatasetView data = manifest_dataset(&manifest, &map);
  const EvalOptions opts = to_options(args);

  MetricReport report;
  report.class_map = &map;
  report.meta.command = command;
  report.meta.options = options_json(args, command == "tracking");
  report.meta.config_digest =
      io::fnv1a_hex(report.meta.options.dump() + io::file_digest(args.classmap));
  report.meta.manifest_digest = manifest.digest;

  if (command == "semantic") {
    report.semantic = evaluate_semantic(data, map, opts);
    report.semantic->confusion.miou();  // no present class is an input error
  } else if (command == "panoptic") {
    report.panoptic = evaluate_panoptic(data, map, opts);
  } else {
    report.tracking = evaluate_tracking(data, map, opts);
  }
  return emit_report(args, report);
}

struct FuseArgs {
  std::string manifest;
  std::string classmap;
  std::string out;
  std::string mode;
  double score_threshold = 0.0;
  std::string class_thresholds;
  std::string threshold_mode = "none";
  int parallelism = 0;
};

ScanLabels raw_to_eval(const fs::path& path, const ClassMap& map) {
  return remap(io::read_scan_labels(path), map);
}

ScanLabels eval_to_raw(const ScanLabels& scan, const ClassMap& map) {
  ScanLabels out = scan;
  for (std::size_t i = 0; i < out.point_count(); ++i) {
    out.semantic[i] = map.raw_representative(out.semantic[i]);
  }
  return out;
}

// Picks per-class score thresholds maximizing instance-level F1 of the fused
// prediction against the ground-truth labels, sweeping each class over the
// (subsampled) distinct scores of its boxes. Ties prefer the lower threshold.
std::vector<std::optional<double>> sweep_max_f1_thresholds(
    const io::Manifest& manifest, const ClassMap& map,
    const std::vector<std::vector<std::vector<Box3D>>>& boxes) {
  std::vector<std::set<double>> scores(map.num_classes());
  for (const auto& seq : boxes) {
    for (const auto& scan : seq) {
      for (const Box3D& b : scan) scores[b.class_id].insert(b.score);
    }
  }

  std::vector<std::optional<double>> chosen(map.num_classes());
  for (ClassId c = 0; c < map.num_classes(); ++c) {
    if (scores[c].empty()) continue;
    std::vector<double> candidates{0.0};
    candidates.insert(candidates.end(), scores[c].begin(), scores[c].end());
    while (candidates.size() > 24) {  // keep the sweep bounded
      std::vector<double> thinned;
      for (std::size_t i = 0; i < candidates.size(); i += 2) thinned.push_back(candidates[i]);
      candidates = std::move(thinned);
    }

    double best_f1 = -1.0, best_t = 0.0;
    for (double t : candidates) {
      FuseOptions fopts;
      fopts.class_thresholds.assign(map.num_classes(), std::nullopt);
      fopts.class_thresholds[c] = t;
      std::int64_t tp = 0, fp = 0, fn = 0;
      for (std::size_t s = 0; s < manifest.sequences.size(); ++s) {
        for (std::size_t i = 0; i < manifest.sequences[s].scans.size(); ++i) {
          const io::ManifestScan& scan = manifest.sequences[s].scans[i];
          const ScanLabels gt = raw_to_eval(manifest.resolve(scan.gt), map);
          const ScanLabels sem = raw_to_eval(manifest.resolve(scan.pred), map);
          const PointCloud cloud = io::read_point_cloud(manifest.resolve(scan.points));
          const ScanLabels fused = fuse_pred(sem, cloud, boxes[s][i], map, fopts);
          PQStats stats(map.num_classes());
          stats.accumulate(match_scan(gt, fused, map));
          tp += stats.for_class(c).tp;
          fp += stats.for_class(c).fp;
          fn += stats.for_class(c).fn;
        }
      }
      const double denom = static_cast<double>(2 * tp + fp + fn);
      const double f1 = denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
      if (f1 > best_f1) {
        best_f1 = f1;
        best_t = t;
      }
    }
    chosen[c] = best_t;
  }
  return chosen;
}

int run_fuse(const FuseArgs& args) {
  const io::Manifest manifest = io::read_manifest(args.manifest);
  const ClassMap map = io::read_class_map(args.classmap);
  const bool gt_mode = args.mode == "gt";
  const fs::path out_dir = args.out;

  FuseOptions fopts;
  fopts.score_threshold = args.score_threshold;
  fopts.class_thresholds.assign(map.num_classes(), std::nullopt);
  if (!args.class_thresholds.empty()) {
    std::ifstream in(args.class_thresholds);
    if (!in) throw EvalError::io("cannot open " + args.class_thresholds);
    const json j = json::parse(in);
    std::map<std::string, ClassId> by_name;
    for (ClassId c = 0; c < map.num_classes(); ++c) by_name[map.class_name(c)] = c;
    for (const auto& [name, value] : j.items()) {
      auto it = by_name.find(name);
      if (it == by_name.end()) throw EvalError::io("unknown class '" + name + "'");
      fopts.class_thresholds[it->second] = value.get<double>();
    }
  }

  // Load all boxes first; gt mode needs per-sequence track registries so the
  // same track string keeps its id across scans.
  std::vector<std::vector<std::vector<Box3D>>> boxes(manifest.sequences.size());
  for (std::size_t s = 0; s < manifest.sequences.size(); ++s) {
    io::TrackRegistry registry;
    for (const io::ManifestScan& scan : manifest.sequences[s].scans) {
      if (scan.boxes.empty()) {
        throw EvalError("scan '" + scan.token + "' lists no boxes");
      }
      if (scan.points.empty()) {
        throw EvalError("scan '" + scan.token + "' lists no points");
      }
      boxes[s].push_back(io::read_boxes(manifest.resolve(scan.boxes), map, &registry));
    }
  }

  if (args.threshold_mode == "maxf1") {
    if (gt_mode) throw EvalError("--threshold-mode maxf1 applies to pred mode only");
    fopts.class_thresholds = sweep_max_f1_thresholds(manifest, map, boxes);
    for (ClassId c = 0; c < map.num_classes(); ++c) {
      if (fopts.class_thresholds[c]) {
        std::cout << "max-F1 threshold for " << map.class_name(c) << ": "
                  << *fopts.class_thresholds[c] << "\n";
      }
    }
  }

  io::Manifest fused_manifest;
  std::size_t written = 0;
  for (std::size_t s = 0; s < manifest.sequences.size(); ++s) {
    io::ManifestSequence out_seq{manifest.sequences[s].id, {}};
    for (std::size_t i = 0; i < manifest.sequences[s].scans.size(); ++i) {
      const io::ManifestScan& scan = manifest.sequences[s].scans[i];
      const std::string& source = gt_mode ? scan.gt : scan.pred;
      const ScanLabels semantic = raw_to_eval(manifest.resolve(source), map);
      const PointCloud cloud = io::read_point_cloud(manifest.resolve(scan.points));
      const ScanLabels fused =
          gt_mode ? fuse_gt(semantic, cloud, boxes[s][i], map)
                  : fuse_pred(semantic, cloud, boxes[s][i], map, fopts);
      const std::string rel = scan.token + ".panoptic.bin";
      io::write_scan_labels(out_dir / rel, eval_to_raw(fused, map));
      written++;

      io::ManifestScan out_scan{scan.token, "", "", "", ""};
      (gt_mode ? out_scan.gt : out_scan.pred) = rel;
      const std::string& other = gt_mode ? scan.pred : scan.gt;
      if (!other.empty()) {
        (gt_mode ? out_scan.pred : out_scan.gt) =
            fs::relative(manifest.resolve(other), out_dir).string();
      }
      out_seq.scans.push_back(std::move(out_scan));
    }
    fused_manifest.sequences.push_back(std::move(out_seq));
  }
  io::write_manifest(out_dir / "manifest.json", fused_manifest);
  std::cout << "fused " << written << " scans into " << out_dir.string() << "\n";
  return 0;
}

int run_gen(const std::string& spec_path, const std::string& out) {
  const ScenarioSpec spec = io::read_scenario_spec(spec_path);
  const ScenarioData data = generate(spec);
  const fs::path out_dir = out;

  io::write_class_map(out_dir / "classmap.json", data.class_map);
  io::ManifestSequence seq{spec.sequence_id, {}};
  for (std::size_t f = 0; f < data.gt.scans.size(); ++f) {
    const std::string& token = data.gt.scan_tokens[f];
    const std::string gt_rel = "gt/" + token + ".panoptic.bin";
    const std::string pred_rel = "pred/" + token + ".panoptic.bin";
    io::write_scan_labels(out_dir / gt_rel, data.gt.scans[f]);
    io::write_scan_labels(out_dir / pred_rel, data.pred.scans[f]);
    seq.scans.push_back({token, gt_rel, pred_rel, "", ""});
  }
  io::Manifest manifest;
  manifest.sequences.push_back(std::move(seq));
  io::write_manifest(out_dir / "manifest.json", manifest);
  std::cout << "generated " << data.gt.scans.size() << " frames in " << out_dir.string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR panoptic segmentation and tracking evaluation toolkit"};
  app.require_subcommand(1);

  MetricArgs semantic_args, panoptic_args, tracking_args;
  add_common_options(app.add_subcommand("semantic", "point-level IoU metrics"),
                     semantic_args, false);
  add_common_options(app.add_subcommand("panoptic", "PQ family metrics"),
                     panoptic_args, false);
  add_common_options(app.add_subcommand("tracking", "PAT, LSTQ and PTQ metrics"),
                     tracking_args, true);

  FuseArgs fuse_args;
  CLI::App* fuse_cmd = app.add_subcommand("fuse", "box + point label fusion");
  fuse_cmd->add_option("manifest", fuse_args.manifest, "dataset manifest JSON")->required();
  fuse_cmd->add_option("--classmap", fuse_args.classmap, "class map JSON")->required();
  fuse_cmd->add_option("--mode", fuse_args.mode, "gt or pred fusion")
      ->check(CLI::IsMember({"gt", "pred"}))
      ->required();
  fuse_cmd->add_option("--out", fuse_args.out, "output directory")->required();
  fuse_cmd->add_option("--score-threshold", fuse_args.score_threshold,
                       "drop boxes below this score (pred mode)")
      ->capture_default_str();
  fuse_cmd->add_option("--class-thresholds", fuse_args.class_thresholds,
                       "JSON file of per-class score thresholds");
  fuse_cmd->add_option("--threshold-mode", fuse_args.threshold_mode,
                       "none or maxf1 (per-class max-F1 sweep)")
      ->check(CLI::IsMember({"none", "maxf1"}))
      ->capture_default_str();
  fuse_cmd->add_option("--parallelism", fuse_args.parallelism, "worker count");

  std::string gen_spec, gen_out;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic scenario dataset");
  gen_cmd->add_option("spec", gen_spec, "scenario spec JSON")->required();
  gen_cmd->add_option("out", gen_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("semantic")) return run_metric("semantic", semantic_args);
    if (app.got_subcommand("panoptic")) return run_metric("panoptic", panoptic_args);
    if (app.got_subcommand("tracking")) return run_metric("tracking", tracking_args);
    if (app.got_subcommand("fuse")) return run_fuse(fuse_args);
    if (app.got_subcommand("gen")) return run_gen(gen_spec, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

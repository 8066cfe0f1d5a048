#include "lpeval/report.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace lpeval {

using nlohmann::json;

std::string format_percent(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", ratio * 100.0);
  return buf;
}

std::string format_ratio(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", ratio);
  return buf;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

json opt(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json semantic_json(const ConfusionMatrix& cm, const ClassMap& map) {
  json per_class = json::array();
  const auto ious = cm.iou_per_class();
  double miou_sum = 0.0, fw_sum = 0.0;
  std::size_t present = 0;
  for (ClassId c = 0; c < map.num_classes(); ++c) {
    const ClassIoU& r = ious[c];
    per_class.push_back({{"name", map.class_name(c)},
                         {"iou", r.present ? json(r.iou) : json(nullptr)},
                         {"tp", r.tp},
                         {"fp", r.fp},
                         {"fn", r.fn},
                         {"gt_points", r.gt_points}});
    if (r.present) {
      present++;
      miou_sum += r.iou;
      fw_sum += static_cast<double>(r.gt_points) * r.iou;
    }
  }
  json out{{"per_class", per_class}, {"total_points", cm.total_points()}};
  out["miou"] = present ? json(miou_sum / static_cast<double>(present)) : json(nullptr);
  out["fwiou"] = present && cm.total_points() > 0
                     ? json(fw_sum / static_cast<double>(cm.total_points()))
                     : json(nullptr);
  return out;
}

json panoptic_json(const PanopticResult& result, const ConfusionMatrix& cm,
                   const ClassMap& map) {
  json per_class = json::array();
  for (ClassId c = 0; c < map.num_classes(); ++c) {
    const ClassPQ& r = result.per_class[c];
    if (r.present) {
      per_class.push_back({{"name", map.class_name(c)},
                           {"pq", r.pq},
                           {"sq", r.sq},
                           {"rq", r.rq}});
    } else {
      per_class.push_back({{"name", map.class_name(c)},
                           {"pq", nullptr},
                           {"sq", nullptr},
                           {"rq", nullptr}});
    }
  }
  json out{{"per_class", per_class},
           {"pq", result.pq},
           {"pq_dagger", result.pq_dagger},
           {"sq", result.sq},
           {"rq", result.rq},
           {"pq_things", opt(result.pq_things)},
           {"sq_things", opt(result.sq_things)},
           {"rq_things", opt(result.rq_things)},
           {"pq_stuff", opt(result.pq_stuff)},
           {"sq_stuff", opt(result.sq_stuff)},
           {"rq_stuff", opt(result.rq_stuff)}};
  try {
    out["miou"] = cm.miou();
  } catch (const EvalError&) {
    out["miou"] = nullptr;
  }
  return out;
}

json tracking_json(const TrackingResult& result, const ClassMap& map) {
  json per_track = json::array();
  for (const TrackDiag& t : result.tracks) {
    per_track.push_back({{"sequence", t.sequence_id},
                         {"track_id", t.track_id},
                         {"class", map.class_name(t.class_id)},
                         {"length", t.length},
                         {"as", t.as_score},
                         {"ids", t.ids},
                         {"n_ids", t.n_ids},
                         {"tq", t.tq}});
  }
  return json{{"pat", result.pat},
              {"lstq", result.lstq},
              {"ptq", result.ptq},
              {"pq", result.pq},
              {"tq", opt(result.tq)},
              {"s_cls", result.s_cls},
              {"s_assoc", opt(result.s_assoc)},
              {"total_ids", result.total_ids},
              {"num_tracks", result.tracks.size()},
              {"per_track", per_track}};
}

void append_summary_line(std::string& out, const std::vector<std::pair<std::string, json>>& cells) {
  bool first = true;
  for (const auto& [label, value] : cells) {
    out += first ? "  " : " | ";
    first = false;
    out += label + " ";
    out += value.is_null() ? "n/a" : format_percent(value.get<double>());
  }
  out += "\n";
}

}  // namespace

json report_to_json(const MetricReport& report) {
  json out{{"schema", kReportSchema},
           {"meta",
            {{"tool", kToolName},
             {"version", kToolVersion},
             {"command", report.meta.command},
             {"created_utc", report.meta.created_utc},
             {"config_digest", report.meta.config_digest},
             {"manifest_digest", report.meta.manifest_digest},
             {"options", report.meta.options}}}};
  const ClassMap& map = *report.class_map;
  json per_sequence = json::array();

  if (report.semantic) {
    out["semantic"] = semantic_json(report.semantic->confusion, map);
    for (const SequenceScore& s : report.semantic->per_sequence) {
      json seq = semantic_json(s.confusion, map);
      seq.erase("per_class");
      seq["id"] = s.id;
      per_sequence.push_back(std::move(seq));
    }
  }
  if (report.panoptic) {
    out["panoptic"] = panoptic_json(report.panoptic->result, report.panoptic->confusion, map);
    for (const SequenceScore& s : report.panoptic->per_sequence) {
      json seq{{"id", s.id}};
      if (s.panoptic) {
        json p = panoptic_json(*s.panoptic, s.confusion, map);
        p.erase("per_class");
        seq.update(p);
      }
      per_sequence.push_back(std::move(seq));
    }
  }
  if (report.tracking) {
    out["tracking"] = tracking_json(report.tracking->result, map);
    for (std::size_t i = 0; i < report.tracking->per_sequence.size(); ++i) {
      json seq{{"id", report.tracking->sequence_stats[i].sequence_id}};
      if (report.tracking->per_sequence[i]) {
        json t = tracking_json(*report.tracking->per_sequence[i], map);
        t.erase("per_track");
        seq.update(t);
      }
      per_sequence.push_back(std::move(seq));
    }
  }
  out["per_sequence"] = std::move(per_sequence);
  return out;
}

std::string render_report(const MetricReport& report) {
  const ClassMap& map = *report.class_map;
  std::string out;
  char line[160];

  if (report.semantic) {
    const json s = semantic_json(report.semantic->confusion, map);
    out += "Semantic segmentation\n";
    out += "  class                     IoU\n";
    for (const json& c : s["per_class"]) {
      std::snprintf(line, sizeof(line), "  %-20s %9s\n",
                    c["name"].get<std::string>().c_str(),
                    c["iou"].is_null() ? "n/a" : format_ratio(c["iou"].get<double>()).c_str());
      out += line;
    }
    append_summary_line(out, {{"mIoU", s["miou"]}, {"fwIoU", s["fwiou"]}});
  }

  if (report.panoptic) {
    const json p = panoptic_json(report.panoptic->result, report.panoptic->confusion, map);
    out += "Panoptic segmentation\n";
    out += "  class                      PQ        SQ        RQ\n";
    for (const json& c : p["per_class"]) {
      std::snprintf(
          line, sizeof(line), "  %-20s %9s %9s %9s\n",
          c["name"].get<std::string>().c_str(),
          c["pq"].is_null() ? "n/a" : format_ratio(c["pq"].get<double>()).c_str(),
          c["sq"].is_null() ? "n/a" : format_ratio(c["sq"].get<double>()).c_str(),
          c["rq"].is_null() ? "n/a" : format_ratio(c["rq"].get<double>()).c_str());
      out += line;
    }
    append_summary_line(out, {{"PQ", p["pq"]},
                              {"PQ†", p["pq_dagger"]},
                              {"SQ", p["sq"]},
                              {"RQ", p["rq"]},
                              {"PQ^Th", p["pq_things"]},
                              {"SQ^Th", p["sq_things"]},
                              {"RQ^Th", p["rq_things"]},
                              {"PQ^St", p["pq_stuff"]},
                              {"SQ^St", p["sq_stuff"]},
                              {"RQ^St", p["rq_stuff"]},
                              {"mIoU", p["miou"]}});
  }

  if (report.tracking) {
    const json t = tracking_json(report.tracking->result, map);
    out += "Panoptic tracking\n";
    append_summary_line(out, {{"PAT", t["pat"]},
                              {"LSTQ", t["lstq"]},
                              {"PTQ", t["ptq"]},
                              {"PQ", t["pq"]},
                              {"TQ", t["tq"]},
                              {"S_cls", t["s_cls"]},
                              {"S_assoc", t["s_assoc"]}});
  }
  return out;
}

void write_report(const std::filesystem::path& path, const MetricReport& report) {
  const std::string payload = report_to_json(report).dump(2) + "\n";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw EvalError::io("cannot open " + tmp.string() + " for writing");
    out << payload;
    if (!out) throw EvalError::io("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace lpeval

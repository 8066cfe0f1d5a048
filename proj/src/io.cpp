#include "lpeval/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lpeval::io {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw EvalError::io("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw EvalError::io("cannot open " + path.string() + " for writing");
  return out;
}

json load_json(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw EvalError::io("malformed JSON in " + path.string());
  }
  return j;
}

void dump_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path, std::ios::out);
  out << j.dump(2) << "\n";
  if (!out) throw EvalError::io("failed writing " + path.string());
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

std::vector<std::uint32_t> read_label_file(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (bytes % 4 != 0) {
    throw EvalError::io("label file " + path.string() + " is not a multiple of 4 bytes");
  }
  std::vector<std::uint32_t> out(bytes / 4);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw EvalError::io("failed reading " + path.string());
  return out;
}

void write_label_file(const std::filesystem::path& path,
                      std::span<const std::uint32_t> labels) {
  auto out = open_out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size() * 4));
  if (!out) throw EvalError::io("failed writing " + path.string());
}

ScanLabels read_scan_labels(const std::filesystem::path& path) {
  return decode_scan(read_label_file(path));
}

void write_scan_labels(const std::filesystem::path& path, const ScanLabels& scan) {
  write_label_file(path, encode_scan(scan));
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (bytes % 16 != 0) {
    throw EvalError::io("point file " + path.string() + " is not a multiple of 16 bytes");
  }
  PointCloud cloud;
  cloud.data.resize(bytes / 4);
  in.read(reinterpret_cast<char*>(cloud.data.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw EvalError::io("failed reading " + path.string());
  return cloud;
}

void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  auto out = open_out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(cloud.data.data()),
            static_cast<std::streamsize>(cloud.data.size() * 4));
  if (!out) throw EvalError::io("failed writing " + path.string());
}

ClassMap read_class_map(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.contains("num_eval_classes") || !j.contains("classes")) {
    throw EvalError::io("class map " + path.string() +
                        " lacks num_eval_classes or classes");
  }
  const auto num_classes = j.at("num_eval_classes").get<ClassId>();
  const ClassId ignore_id = j.value("ignore_id", num_classes);
  std::vector<ClassEntry> entries;
  for (const json& e : j.at("classes")) {
    ClassEntry entry;
    entry.raw_id = e.at("raw_id").get<std::uint32_t>();
    entry.ignore = e.value("ignore", false);
    entry.eval_id = entry.ignore ? e.value("eval_id", ignore_id)
                                 : e.at("eval_id").get<ClassId>();
    entry.name = e.value("name", "class" + std::to_string(entry.eval_id));
    entry.thing = e.value("thing", false);
    entries.push_back(std::move(entry));
  }
  try {
    return ClassMap(std::move(entries), num_classes, ignore_id);
  } catch (const EvalError& err) {
    throw EvalError::io("class map " + path.string() + ": " + err.what());
  }
}

void write_class_map(const std::filesystem::path& path, const ClassMap& map) {
  json classes = json::array();
  for (const ClassEntry& e : map.entries()) {
    classes.push_back({{"raw_id", e.raw_id},
                       {"eval_id", e.eval_id},
                       {"name", e.name},
                       {"thing", e.thing},
                       {"ignore", e.ignore}});
  }
  dump_json(path, json{{"schema", "classmap_v1"},
                       {"num_eval_classes", map.num_classes()},
                       {"ignore_id", map.ignore_id()},
                       {"classes", classes}});
}

InstanceId TrackRegistry::id_for(const std::string& track) {
  auto it = ids.find(track);
  if (it != ids.end()) return it->second;
  if (next >= kInstanceModulus) {
    throw EvalError("sequence exceeds 999 distinct track ids");
  }
  return ids.emplace(track, next++).first->second;
}

std::vector<Box3D> read_boxes(const std::filesystem::path& path, const ClassMap& map,
                              TrackRegistry* registry) {
  std::map<std::string, ClassId> by_name;
  for (ClassId c = 0; c < map.num_classes(); ++c) by_name[map.class_name(c)] = c;

  const json j = load_json(path);
  std::vector<Box3D> out;
  for (const json& b : j.value("boxes", json::array())) {
    Box3D box;
    const auto& center = b.at("center");
    const auto& size = b.at("size");
    for (int k = 0; k < 3; ++k) {
      box.center[k] = center.at(k).get<double>();
      box.size[k] = size.at(k).get<double>();
    }
    box.yaw = normalize_yaw(b.value("yaw", 0.0));
    const json& cls = b.at("class");
    if (cls.is_string()) {
      auto it = by_name.find(cls.get<std::string>());
      if (it == by_name.end()) {
        throw EvalError::io("box file " + path.string() + ": unknown class '" +
                            cls.get<std::string>() + "'");
      }
      box.class_id = it->second;
    } else {
      box.class_id = cls.get<ClassId>();
    }
    box.score = b.value("score", 1.0);
    if (b.contains("track")) {
      const json& track = b.at("track");
      if (track.is_string()) {
        if (registry == nullptr) {
          throw EvalError::io("box file " + path.string() +
                              " uses track strings but no registry was given");
        }
        box.track_id = registry->id_for(track.get<std::string>());
      } else {
        box.track_id = track.get<InstanceId>();
      }
    }
    out.push_back(box);
  }
  return out;
}

void write_boxes(const std::filesystem::path& path, std::span<const Box3D> boxes,
                 const ClassMap& map) {
  json arr = json::array();
  for (const Box3D& b : boxes) {
    json entry{{"center", b.center},
               {"size", b.size},
               {"yaw", b.yaw},
               {"class", map.class_name(b.class_id)},
               {"score", b.score}};
    if (b.track_id) entry["track"] = *b.track_id;
    arr.push_back(std::move(entry));
  }
  dump_json(path, json{{"schema", "boxes_v1"}, {"boxes", arr}});
}

Manifest read_manifest(const std::filesystem::path& path) {
  const json j = load_json(path);
  Manifest out;
  out.root = path.has_parent_path() ? path.parent_path() : ".";
  out.digest = file_digest(path);
  for (const json& s : j.value("sequences", json::array())) {
    ManifestSequence seq;
    seq.id = s.at("id").get<std::string>();
    for (const json& scan : s.value("scans", json::array())) {
      ManifestScan m;
      m.token = scan.at("token").get<std::string>();
      m.gt = scan.value("gt", "");
      m.pred = scan.value("pred", "");
      m.points = scan.value("points", "");
      m.boxes = scan.value("boxes", "");
      seq.scans.push_back(std::move(m));
    }
    out.sequences.push_back(std::move(seq));
  }
  if (out.sequences.empty()) {
    throw EvalError::io("manifest " + path.string() + " lists no sequences");
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  json sequences = json::array();
  for (const ManifestSequence& seq : manifest.sequences) {
    json scans = json::array();
    for (const ManifestScan& m : seq.scans) {
      json entry{{"token", m.token}};
      if (!m.gt.empty()) entry["gt"] = m.gt;
      if (!m.pred.empty()) entry["pred"] = m.pred;
      if (!m.points.empty()) entry["points"] = m.points;
      if (!m.boxes.empty()) entry["boxes"] = m.boxes;
      scans.push_back(std::move(entry));
    }
    sequences.push_back(json{{"id", seq.id}, {"scans", scans}});
  }
  dump_json(path, json{{"schema", "manifest_v1"}, {"sequences", sequences}});
}

ScenarioSpec read_scenario_spec(const std::filesystem::path& path) {
  const json j = load_json(path);
  ScenarioSpec spec;
  spec.sequence_id = j.value("sequence_id", "seq0");
  spec.frames = j.at("frames").get<int>();
  spec.seed = j.value("seed", 0ull);
  spec.background_points = j.value("background_points", 20);
  for (const json& t : j.value("tracks", json::array())) {
    TrackSpec track;
    track.track_id = t.at("track_id").get<InstanceId>();
    track.class_id = t.value("class_id", 1u);
    track.first_frame = t.value("first_frame", 1);
    track.last_frame = t.value("last_frame", spec.frames);
    track.points_per_frame = t.value("points_per_frame", 20);
    spec.tracks.push_back(track);
  }
  for (const json& p : j.value("plan", json::array())) {
    const auto track_id = p.at("track_id").get<InstanceId>();
    const int first = p.contains("frame") ? p.at("frame").get<int>()
                                          : p.at("first_frame").get<int>();
    const int last = p.contains("frame") ? first : p.at("last_frame").get<int>();
    PredStep step;
    const std::string action = p.value("action", p.contains("pred_id") ? "relabel" : "keep");
    if (action == "relabel") {
      step.action = PredAction::kRelabel;
      step.pred_id = p.at("pred_id").get<InstanceId>();
    } else if (action == "drop") {
      step.action = PredAction::kDrop;
    } else if (action == "void") {
      step.action = PredAction::kVoid;
    } else if (action != "keep") {
      throw EvalError::io("scenario " + path.string() + ": unknown action '" + action + "'");
    }
    for (int f = first; f <= last; ++f) spec.plan[{track_id, f}] = step;
  }
  return spec;
}

}  // namespace lpeval::io

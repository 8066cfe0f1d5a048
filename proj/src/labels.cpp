#include "lpeval/labels.hpp"

#include <algorithm>
#include <map>

namespace lpeval {

std::uint32_t encode_panoptic(ClassId class_id, InstanceId instance_id) {
  if (instance_id >= kInstanceModulus) {
    throw EvalError("instance id " + std::to_string(instance_id) +
                    " does not fit the packed encoding (max 999)");
  }
  return class_id * kInstanceModulus + instance_id;
}

ClassMap::ClassMap(std::vector<ClassEntry> entries, ClassId num_eval_classes,
                   std::optional<ClassId> ignore_id)
    : entries_(std::move(entries)),
      num_classes_(num_eval_classes),
      ignore_id_(ignore_id.value_or(num_eval_classes)) {
  if (ignore_id_ < num_classes_) {
    throw EvalError("ignore id must lie outside [0, num_eval_classes)");
  }
  thing_.assign(num_classes_, false);
  names_.assign(num_classes_ + 1, std::string());
  names_[num_classes_] = "void";
  raw_rep_.assign(num_classes_ + 1, UINT32_MAX);
  std::vector<bool> seen(num_classes_, false);

  for (const ClassEntry& e : entries_) {
    if (!raw_to_eval_.emplace(e.raw_id, e.ignore ? ignore_id_ : e.eval_id).second) {
      throw EvalError("raw class id " + std::to_string(e.raw_id) +
                      " mapped more than once");
    }
    std::uint32_t& rep = raw_rep_[e.ignore ? num_classes_ : std::min(e.eval_id, num_classes_)];
    rep = std::min(rep, e.raw_id);
    if (e.ignore) {
      if (e.thing) {
        throw EvalError("class '" + e.name + "' is flagged both thing and ignore");
      }
      if (e.eval_id != ignore_id_) {
        throw EvalError("ignore entry '" + e.name + "' must use the ignore eval id");
      }
      continue;
    }
    if (e.eval_id >= num_classes_) {
      throw EvalError("eval id " + std::to_string(e.eval_id) +
                      " outside [0, num_eval_classes) for class '" + e.name + "'");
    }
    if (seen[e.eval_id]) {
      if (thing_[e.eval_id] != e.thing) {
        throw EvalError("conflicting thing/stuff flags for eval id " +
                        std::to_string(e.eval_id));
      }
    } else {
      seen[e.eval_id] = true;
      thing_[e.eval_id] = e.thing;
      names_[e.eval_id] = e.name;
    }
  }
  for (ClassId c = 0; c < num_classes_; ++c) {
    if (!seen[c]) {
      throw EvalError("eval id " + std::to_string(c) + " has no class entry");
    }
  }
}

ClassId ClassMap::eval_id(std::uint32_t raw_id) const {
  auto it = raw_to_eval_.find(raw_id);
  if (it == raw_to_eval_.end()) throw EvalError::unknown_raw_class(raw_id);
  return it->second;
}

const std::string& ClassMap::class_name(ClassId eval_id) const {
  if (eval_id < num_classes_) return names_[eval_id];
  return names_[num_classes_];
}

std::vector<ClassId> ClassMap::thing_classes() const {
  std::vector<ClassId> out;
  for (ClassId c = 0; c < num_classes_; ++c)
    if (thing_[c]) out.push_back(c);
  return out;
}

std::vector<ClassId> ClassMap::stuff_classes() const {
  std::vector<ClassId> out;
  for (ClassId c = 0; c < num_classes_; ++c)
    if (!thing_[c]) out.push_back(c);
  return out;
}

std::uint32_t ClassMap::raw_representative(ClassId eval_id) const {
  const std::size_t slot = eval_id < num_classes_ ? eval_id : num_classes_;
  if (raw_rep_[slot] == UINT32_MAX) {
    throw EvalError("no raw class id maps to eval class '" + class_name(eval_id) + "'");
  }
  return raw_rep_[slot];
}

ClassMap ClassMap::identity(ClassId num_classes, std::span<const ClassId> thing_ids) {
  std::vector<ClassEntry> entries;
  entries.reserve(num_classes + 1);
  for (ClassId c = 0; c < num_classes; ++c) {
    bool thing = std::find(thing_ids.begin(), thing_ids.end(), c) != thing_ids.end();
    entries.push_back({c, c, "class" + std::to_string(c), thing, false});
  }
  entries.push_back({num_classes, num_classes, "void", false, true});
  return ClassMap(std::move(entries), num_classes);
}

ScanLabels decode_scan(std::span<const std::uint32_t> packed) {
  ScanLabels out;
  out.semantic.reserve(packed.size());
  out.instance.reserve(packed.size());
  for (std::uint32_t raw : packed) {
    auto [cls, inst] = decode_panoptic(raw);
    out.semantic.push_back(cls);
    out.instance.push_back(inst);
  }
  return out;
}

std::vector<std::uint32_t> encode_scan(const ScanLabels& scan) {
  std::vector<std::uint32_t> out;
  out.reserve(scan.point_count());
  for (std::size_t i = 0; i < scan.point_count(); ++i) {
    out.push_back(encode_panoptic(scan.semantic[i], scan.instance[i]));
  }
  return out;
}

ScanLabels remap(const ScanLabels& scan, const ClassMap& map) {
  ScanLabels out;
  out.semantic.resize(scan.point_count());
  out.instance.resize(scan.point_count());
  for (std::size_t i = 0; i < scan.point_count(); ++i) {
    ClassId eval = map.eval_id(scan.semantic[i]);
    out.semantic[i] = eval;
    out.instance[i] = map.is_thing(eval) ? scan.instance[i] : 0;
  }
  return out;
}

std::vector<Segment> extract_segments(const ScanLabels& scan, const ClassMap& map) {
  std::map<std::pair<ClassId, InstanceId>, std::vector<std::uint32_t>> groups;
  for (std::size_t i = 0; i < scan.point_count(); ++i) {
    ClassId cls = scan.semantic[i];
    InstanceId inst = scan.instance[i];
    if (inst == 0 || !map.is_thing(cls)) continue;
    groups[{cls, inst}].push_back(static_cast<std::uint32_t>(i));
  }
  std::vector<Segment> out;
  out.reserve(groups.size());
  for (auto& [key, indices] : groups) {
    out.push_back({key.first, key.second, std::move(indices)});
  }
  return out;
}

std::vector<Segment> filter_min_points(std::vector<Segment> segments,
                                       std::size_t threshold) {
  std::erase_if(segments, [threshold](const Segment& s) {
    return s.point_indices.size() <= threshold;
  });
  return segments;
}

}  // namespace lpeval

// End-to-end fusion check through the CLI binary: build a small box+point
// dataset on disk, fuse ground truth and predictions, then evaluate the fused
// pair and expect PQ = 1.
//
// usage: fuse_cli_check <path-to-lpeval-binary> <work-dir>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lpeval/evaluate.hpp"
#include "lpeval/io.hpp"

using namespace lpeval;
namespace fs = std::filesystem;

namespace {

int fail(const std::string& message) {
  std::fprintf(stderr, "fuse_cli_check: %s\n", message.c_str());
  return 1;
}

int run(const std::string& command) {
  std::printf("+ %s\n", command.c_str());
  return std::system(command.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) return fail("expected <lpeval binary> <work dir>");
  const std::string lpeval_bin = argv[1];
  const fs::path work = argv[2];
  fs::remove_all(work);
  fs::create_directories(work / "sem");
  fs::create_directories(work / "points");
  fs::create_directories(work / "boxes");

  const ClassMap map = ClassMap::identity(2, std::vector<ClassId>{1});
  io::write_class_map(work / "classmap.json", map);

  io::Manifest manifest;
  io::ManifestSequence seq{"seq0", {}};
  for (int f = 0; f < 3; ++f) {
    const std::string token = "t" + std::to_string(f);
    PointCloud cloud;
    ScanLabels semantic;
    for (int k = 0; k < 2; ++k) {  // two 20-point clusters, drifting over time
      for (int i = 0; i < 20; ++i) {
        cloud.push_back(static_cast<float>(10.0 * k + 0.02 * i + 0.1 * f), 0.f, 0.f);
        semantic.semantic.push_back(1);
        semantic.instance.push_back(0);
      }
    }
    for (int i = 0; i < 30; ++i) {  // stuff background with a sparse pocket
      cloud.push_back(static_cast<float>(40.0 + 0.05 * i), 5.f, 0.f);
      semantic.semantic.push_back(0);
      semantic.instance.push_back(0);
    }

    std::vector<Box3D> boxes;
    for (int k = 0; k < 2; ++k) {
      Box3D box;
      box.center = {10.0 * k + 0.2 + 0.1 * f, 0, 0};
      box.size = {2, 2, 2};
      box.class_id = 1;
      box.score = 0.9 - 0.1 * k;
      boxes.push_back(box);
    }
    Box3D decoy;  // low-score box over a handful of stuff points
    decoy.center = {40.1, 5, 0};
    decoy.size = {0.4, 2, 2};
    decoy.class_id = 1;
    decoy.score = 0.05;
    boxes.push_back(decoy);

    io::write_scan_labels(work / "sem" / (token + ".panoptic.bin"), semantic);
    io::write_point_cloud(work / "points" / (token + ".bin"), cloud);
    // track strings keep ids stable across scans in gt mode
    {
      std::ofstream out(work / "boxes" / (token + ".json"));
      out << R"({"schema": "boxes_v1", "boxes": [)";
      for (std::size_t b = 0; b < boxes.size(); ++b) {
        if (b) out << ",";
        out << R"({"center": [)" << boxes[b].center[0] << "," << boxes[b].center[1]
            << "," << boxes[b].center[2] << R"(], "size": [)" << boxes[b].size[0]
            << "," << boxes[b].size[1] << "," << boxes[b].size[2]
            << R"(], "yaw": 0, "class": 1, "score": )" << boxes[b].score
            << R"(, "track": "obj)" << b << R"("})";
      }
      out << "]}";
    }
    seq.scans.push_back({token, "sem/" + token + ".panoptic.bin",
                         "sem/" + token + ".panoptic.bin", "points/" + token + ".bin",
                         "boxes/" + token + ".json"});
  }
  manifest.sequences.push_back(seq);
  io::write_manifest(work / "manifest.json", manifest);

  const std::string base = "\"" + lpeval_bin + "\" fuse \"" +
                           (work / "manifest.json").string() + "\" --classmap \"" +
                           (work / "classmap.json").string() + "\"";
  if (run(base + " --mode gt --out \"" + (work / "fused_gt").string() + "\"") != 0) {
    return fail("gt fusion failed");
  }
  if (run(base + " --mode pred --score-threshold 0 --out \"" +
          (work / "fused_pred").string() + "\"") != 0) {
    return fail("pred fusion failed");
  }
  if (run(base + " --mode pred --threshold-mode maxf1 --out \"" +
          (work / "fused_maxf1").string() + "\"") != 0) {
    return fail("max-F1 fusion failed");
  }

  // evaluate fused pred against fused gt
  io::Manifest eval_manifest;
  io::ManifestSequence eval_seq{"seq0", {}};
  for (int f = 0; f < 3; ++f) {
    const std::string token = "t" + std::to_string(f);
    eval_seq.scans.push_back({token, "fused_gt/" + token + ".panoptic.bin",
                              "fused_pred/" + token + ".panoptic.bin", "", ""});
  }
  eval_manifest.sequences.push_back(eval_seq);
  io::write_manifest(work / "eval_manifest.json", eval_manifest);

  const fs::path report = work / "report.json";
  if (run("\"" + lpeval_bin + "\" panoptic \"" + (work / "eval_manifest.json").string() +
          "\" --classmap \"" + (work / "classmap.json").string() + "\" --out \"" +
          report.string() + "\"") != 0) {
    return fail("evaluation failed");
  }
  std::ifstream in(report);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  // the 5-point decoy instance is filtered out, so things stay perfect
  if (text.find("\"pq_things\": 1.0") == std::string::npos) {
    return fail("fused evaluation did not reach thing PQ 1.0:\n" + text);
  }

  // the decoy labeled a few stuff points but was filtered at evaluation time
  const ScanLabels fused =
      io::read_scan_labels(work / "fused_pred" / "t0.panoptic.bin");
  int decoy_points = 0;
  for (std::size_t i = 40; i < fused.point_count(); ++i) {
    if (fused.instance[i] != 0) decoy_points++;
  }
  if (decoy_points < 1 || decoy_points > 15) {
    return fail("decoy box labeled " + std::to_string(decoy_points) +
                " points, expected a sub-threshold handful");
  }

  std::printf("fuse_cli_check: OK\n");
  return 0;
}

// Times the OpenMP-parallel evaluation path against the serial reference on
// synthetic scans and checks that both produce the same numbers.
//
// usage: bench_eval [scans] [points_per_scan] [workers]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "lpeval/evaluate.hpp"

using namespace lpeval;
using Clock = std::chrono::steady_clock;

namespace {

struct Dataset {
  std::vector<ScanLabels> gt;
  std::vector<ScanLabels> pred;
};

Dataset make_pool(int pool, int points) {
  Dataset out;
  for (int p = 0; p < pool; ++p) {
    std::mt19937_64 rng(100 + p);
    ScanLabels gt;
    const int instances = 30;
    const int per_instance = points / (2 * instances);
    for (int i = 0; i < instances; ++i) {
      const ClassId cls = 1 + static_cast<ClassId>(i % 2);
      gt.semantic.insert(gt.semantic.end(), per_instance, cls);
      gt.instance.insert(gt.instance.end(), per_instance, static_cast<InstanceId>(i + 1));
    }
    const int rest = points - instances * per_instance;
    gt.semantic.insert(gt.semantic.end(), rest, 0);
    gt.instance.insert(gt.instance.end(), rest, 0);

    ScanLabels pred = gt;
    for (std::size_t i = 0; i < pred.point_count(); ++i) {
      const int r = static_cast<int>(rng() % 100);
      if (r == 0) {
        pred.semantic[i] = 0;
        pred.instance[i] = 0;
      } else if (r == 1 && pred.instance[i] != 0) {
        pred.instance[i] = 1 + (pred.instance[i] % instances);
      }
    }
    out.gt.push_back(std::move(gt));
    out.pred.push_back(std::move(pred));
  }
  return out;
}

double run(const DatasetView& view, const ClassMap& map, int workers, double* pq) {
  EvalOptions opts;
  opts.workers = workers;
  const auto start = Clock::now();
  const PanopticOutcome out = evaluate_panoptic(view, map, opts);
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  *pq = out.result.pq;
  return secs;
}

}  // namespace

int main(int argc, char** argv) {
  const int scans = argc > 1 ? std::atoi(argv[1]) : 400;
  const int points = argc > 2 ? std::atoi(argv[2]) : 35000;
  const int workers = argc > 3 ? std::atoi(argv[3]) : resolve_workers(0);

  const ClassMap map = ClassMap::identity(3, std::vector<ClassId>{1, 2});
  const Dataset pool = make_pool(16, points);

  DatasetView view;
  view.sequences.push_back({"bench", std::vector<std::string>(scans, "scan")});
  view.load = [&](std::size_t, std::size_t scan, ScanLabels& g, ScanLabels& p) {
    const std::size_t k = scan % pool.gt.size();
    g = pool.gt[k];
    p = pool.pred[k];
  };

  std::printf("panoptic evaluation, %d scans x %d points\n", scans, points);
  double pq_serial = 0.0, pq_parallel = 0.0;
  const double t_serial = run(view, map, 1, &pq_serial);
  std::printf("  serial reference   %8.3f s  (%7.1f scans/s)\n", t_serial,
              scans / t_serial);
  const double t_parallel = run(view, map, workers, &pq_parallel);
  std::printf("  parallel x%-2d       %8.3f s  (%7.1f scans/s)\n", workers,
              t_parallel, scans / t_parallel);
  std::printf("  speedup            %8.2fx\n", t_serial / t_parallel);

  if (pq_serial != pq_parallel) {
    std::printf("MISMATCH: serial PQ %.17g != parallel PQ %.17g\n", pq_serial,
                pq_parallel);
    return 1;
  }
  std::printf("  identical results  PQ = %.6f\n", pq_serial);
  return 0;
}

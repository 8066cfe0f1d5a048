#pragma once

#include <cstdint>
#include <vector>

#include "lpeval/labels.hpp"

namespace lpeval {

struct ClassIoU {
  bool present = false;  // TP + FP + FN > 0
  double iou = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t gt_points = 0;
};

// Point-level confusion counts; rows are ground truth, columns prediction.
// Points whose ground truth is the ignore class are dropped before
// accumulation. Predicted-ignore points keep a dedicated column so they count
// as misses for their true class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(ClassId num_classes);

  void accumulate(const ScanLabels& gt, const ScanLabels& pred);
  void merge(const ConfusionMatrix& other);

  ClassId num_classes() const noexcept { return num_classes_; }
  std::uint64_t total_points() const noexcept { return total_; }

  /// counts[gt][pred]; any id >= num_classes() addresses the ignore slot.
  std::uint64_t at(ClassId gt_class, ClassId pred_class) const;

  std::vector<ClassIoU> iou_per_class() const;
  double miou() const;
  double fwiou() const;

 private:
  std::size_t slot(ClassId c) const noexcept {
    return c < num_classes_ ? c : num_classes_;
  }

  ClassId num_classes_;
  std::vector<std::uint64_t> counts_;  // (num_classes_ + 1)^2
  std::uint64_t total_ = 0;
};

}  // namespace lpeval

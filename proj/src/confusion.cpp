#include "lpeval/confusion.hpp"

namespace lpeval {

ConfusionMatrix::ConfusionMatrix(ClassId num_classes)
    : num_classes_(num_classes),
      counts_(static_cast<std::size_t>(num_classes + 1) * (num_classes + 1), 0) {}

void ConfusionMatrix::accumulate(const ScanLabels& gt, const ScanLabels& pred) {
  if (gt.point_count() != pred.point_count()) {
    throw EvalError::length_mismatch(gt.point_count(), pred.point_count());
  }
  const std::size_t stride = num_classes_ + 1;
  for (std::size_t i = 0; i < gt.point_count(); ++i) {
    ClassId g = gt.semantic[i];
    if (g >= num_classes_) continue;  // ground-truth ignore
    counts_[g * stride + slot(pred.semantic[i])]++;
    total_++;
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) {
    throw EvalError("cannot merge confusion matrices of different class counts");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

std::uint64_t ConfusionMatrix::at(ClassId gt_class, ClassId pred_class) const {
  return counts_[slot(gt_class) * (num_classes_ + 1) + slot(pred_class)];
}

std::vector<ClassIoU> ConfusionMatrix::iou_per_class() const {
  const std::size_t stride = num_classes_ + 1;
  std::vector<ClassIoU> out(num_classes_);
  for (ClassId c = 0; c < num_classes_; ++c) {
    ClassIoU& r = out[c];
    r.tp = counts_[c * stride + c];
    for (std::size_t p = 0; p < stride; ++p) {
      if (p != c) r.fn += counts_[c * stride + p];
    }
    for (ClassId g = 0; g < num_classes_; ++g) {
      if (g != c) r.fp += counts_[g * stride + c];
    }
    r.gt_points = r.tp + r.fn;
    std::uint64_t denom = r.tp + r.fp + r.fn;
    r.present = denom > 0;
    r.iou = r.present ? static_cast<double>(r.tp) / static_cast<double>(denom) : 0.0;
  }
  return out;
}

double ConfusionMatrix::miou() const {
  double sum = 0.0;
  std::size_t present = 0;
  for (const ClassIoU& r : iou_per_class()) {
    if (!r.present) continue;
    sum += r.iou;
    present++;
  }
  if (present == 0) throw EvalError::no_present_classes();
  return sum / static_cast<double>(present);
}

double ConfusionMatrix::fwiou() const {
  double weighted = 0.0;
  std::size_t present = 0;
  for (const ClassIoU& r : iou_per_class()) {
    if (!r.present) continue;
    present++;
    weighted += static_cast<double>(r.gt_points) * r.iou;
  }
  if (present == 0) throw EvalError::no_present_classes();
  return weighted / static_cast<double>(total_);
}

}  // namespace lpeval

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lpeval {

// Recoverable evaluation errors: bad inputs, malformed files, mismatched
// scans. Internal invariant violations throw std::logic_error instead.
class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}

  static EvalError unknown_raw_class(std::uint32_t raw_id) {
    return EvalError("unknown raw class id " + std::to_string(raw_id));
  }
  static EvalError length_mismatch(std::size_t gt, std::size_t pred) {
    return EvalError("point count mismatch: gt has " + std::to_string(gt) +
                     " points, pred has " + std::to_string(pred));
  }
  static EvalError no_present_classes() {
    return EvalError("no class is present in the accumulated data");
  }
  static EvalError frame_count_mismatch(std::size_t gt, std::size_t pred) {
    return EvalError("frame count mismatch: gt has " + std::to_string(gt) +
                     " frames, pred has " + std::to_string(pred));
  }
  static EvalError invalid_plan(const std::string& detail) {
    return EvalError("invalid prediction plan: " + detail);
  }
  static EvalError bad_permutation(const std::string& detail) {
    return EvalError("bad frame permutation: " + detail);
  }
  static EvalError out_of_range_frame(int frame) {
    return EvalError("frame " + std::to_string(frame) +
                     " is outside the track's ground-truth presence");
  }
  static EvalError io(const std::string& detail) { return EvalError(detail); }
};

}  // namespace lpeval

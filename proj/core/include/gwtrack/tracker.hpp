#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gwtrack/geometry.hpp"

namespace gwtrack {

struct RefineConfig {
  double conf_split = 0.5;       ///< boxes strictly above go to the high-confidence list
  double iou_match = 0.25;       ///< a candidate matches an anchor when IOU is strictly above
  double adaptive_frac = 0.001;  ///< keep detections with confidence >= frac * max confidence

  void validate() const;
};

/// Confirmed and tentative box sets after a frame.
struct TrackerState {
  std::vector<BBox> confirmed;
  std::vector<BBox> tentative;
  long frame_index = -1;  ///< -1 before the first frame

  friend bool operator==(const TrackerState&, const TrackerState&) = default;
};

[[nodiscard]] std::vector<Detection> adaptive_filter(std::span<const Detection> detections,
                                                     double adaptive_frac);

struct ConfidenceSplit {
  std::vector<Detection> high;
  std::vector<Detection> low;
};

[[nodiscard]] ConfidenceSplit split_by_confidence(std::span<const Detection> detections,
                                                  double conf_split);

/// One refinement step: match the current candidates against the previous
/// frame's confirmed and tentative boxes, merge matches into confirmed boxes
/// and carry unmatched high-confidence boxes (and unmatched confirmed boxes,
/// for one frame) as tentative.
[[nodiscard]] TrackerState refine_step(const TrackerState& prev,
                                       std::span<const Detection> detections,
                                       const RefineConfig& config = {});

/// Folds refine_step over a sequence of per-frame detection lists from an empty state.
[[nodiscard]] std::vector<TrackerState> track_sequence(
    std::span<const std::vector<Detection>> frames, const RefineConfig& config = {});

/// Streaming wrapper around refine_step.
class Tracker {
 public:
  explicit Tracker(RefineConfig config = {}) : config_(config) { config_.validate(); }

  const TrackerState& update(std::span<const Detection> detections) {
    state_ = refine_step(state_, detections, config_);
    return state_;
  }
  [[nodiscard]] const TrackerState& state() const noexcept { return state_; }
  void reset() { state_ = {}; }

 private:
  RefineConfig config_;
  TrackerState state_;
};

/// Ablation baseline: the adaptive-filtered high-confidence boxes of a frame, unrefined.
[[nodiscard]] std::vector<BBox> passthrough_boxes(std::span<const Detection> detections,
                                                  const RefineConfig& config = {});

}  // namespace gwtrack

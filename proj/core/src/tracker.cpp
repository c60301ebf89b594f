#include "gwtrack/tracker.hpp"

#include <algorithm>
#include <numeric>

#include "gwtrack/errors.hpp"

namespace gwtrack {

namespace {

constexpr double kDuplicateIou = 0.5;

struct Anchor {
  BBox box;
  bool confirmed = false;
};

struct Refined {
  BBox box;
  double max_conf = 0.0;
};

bool in_unit_interval(double v) { return v > 0.0 && v <= 1.0; }

// Greedy suppression by descending confidence; survivors keep their input order.
std::vector<BBox> deduplicate(const std::vector<Refined>& refined) {
  std::vector<std::size_t> order(refined.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return refined[a].max_conf > refined[b].max_conf;
  });
  std::vector<bool> keep(refined.size(), false);
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return iou(refined[i].box, refined[k].box) > kDuplicateIou;
    });
    if (!clash) {
      keep[i] = true;
      kept.push_back(i);
    }
  }
  std::vector<BBox> out;
  for (std::size_t i = 0; i < refined.size(); ++i) {
    if (keep[i]) out.push_back(refined[i].box);
  }
  return out;
}

void push_unique(std::vector<BBox>& dst, const BBox& box, const std::vector<BBox>& exclude) {
  if (std::find(exclude.begin(), exclude.end(), box) != exclude.end()) return;
  if (std::find(dst.begin(), dst.end(), box) != dst.end()) return;
  dst.push_back(box);
}

}  // namespace

void RefineConfig::validate() const {
  if (!in_unit_interval(conf_split) || !in_unit_interval(iou_match) ||
      !in_unit_interval(adaptive_frac)) {
    throw ConfigError("tracker: conf_split, iou_match and adaptive_frac must lie in (0,1]");
  }
}

std::vector<Detection> adaptive_filter(std::span<const Detection> detections, double adaptive_frac) {
  if (detections.empty()) return {};
  double peak = detections.front().confidence;
  for (const Detection& d : detections) peak = std::max(peak, d.confidence);
  const double threshold = adaptive_frac * peak;
  std::vector<Detection> out;
  for (const Detection& d : detections) {
    if (d.confidence >= threshold) out.push_back(d);
  }
  return out;
}

ConfidenceSplit split_by_confidence(std::span<const Detection> detections, double conf_split) {
  ConfidenceSplit split;
  for (const Detection& d : detections) {
    (d.confidence > conf_split ? split.high : split.low).push_back(d);
  }
  return split;
}

TrackerState refine_step(const TrackerState& prev, std::span<const Detection> detections,
                         const RefineConfig& config) {
  const std::vector<Detection> candidates = adaptive_filter(detections, config.adaptive_frac);

  std::vector<Anchor> anchors;
  anchors.reserve(prev.confirmed.size() + prev.tentative.size());
  for (const BBox& b : prev.confirmed) anchors.push_back({b, true});
  for (const BBox& b : prev.tentative) anchors.push_back({b, false});

  std::vector<bool> candidate_matched(candidates.size(), false);
  std::vector<Refined> refined;
  std::vector<BBox> unmatched_confirmed;
  std::vector<BBox> matched_boxes;
  for (const Anchor& anchor : anchors) {
    matched_boxes.clear();
    double max_conf = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (iou(candidates[i].box, anchor.box) > config.iou_match) {
        matched_boxes.push_back(candidates[i].box);
        max_conf = std::max(max_conf, candidates[i].confidence);
        candidate_matched[i] = true;
      }
    }
    if (!matched_boxes.empty()) {
      refined.push_back({merge_boxes(matched_boxes), max_conf});
    } else if (anchor.confirmed) {
      unmatched_confirmed.push_back(anchor.box);
    }
  }

  TrackerState next;
  next.frame_index = prev.frame_index + 1;
  next.confirmed = deduplicate(refined);
  for (const BBox& b : unmatched_confirmed) push_unique(next.tentative, b, next.confirmed);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!candidate_matched[i] && candidates[i].confidence > config.conf_split) {
      push_unique(next.tentative, candidates[i].box, next.confirmed);
    }
  }
  return next;
}

std::vector<TrackerState> track_sequence(std::span<const std::vector<Detection>> frames,
                                         const RefineConfig& config) {
  Tracker tracker(config);
  std::vector<TrackerState> states;
  states.reserve(frames.size());
  for (const auto& dets : frames) states.push_back(tracker.update(dets));
  return states;
}

std::vector<BBox> passthrough_boxes(std::span<const Detection> detections,
                                    const RefineConfig& config) {
  const auto split = split_by_confidence(adaptive_filter(detections, config.adaptive_frac),
                                         config.conf_split);
  std::vector<BBox> out;
  out.reserve(split.high.size());
  for (const Detection& d : split.high) out.push_back(d.box);
  return out;
}

}  // namespace gwtrack

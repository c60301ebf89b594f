#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gwtrack/config.hpp"
#include "gwtrack/geometry.hpp"
#include "gwtrack/image.hpp"
#include "gwtrack/tracker.hpp"

namespace gwtrack {

/// Wall time per stage for one frame, milliseconds.
struct StageTiming {
  double track_ms = 0.0;
  double crop_ms = 0.0;
  double enhance_ms = 0.0;
  double segment_ms = 0.0;
  double paste_ms = 0.0;
  double total_ms = 0.0;  ///< measured around the whole frame, not the sum of stages

  [[nodiscard]] double stage_sum() const noexcept {
    return track_ms + crop_ms + enhance_ms + segment_ms + paste_ms;
  }
};

struct FrameOutput {
  TrackerState state;
  BinaryMask mask;  ///< union of the pasted per-box masks
  StageTiming timing;
};

enum class Lane { single, parallel };

/// Two-stage streaming pipeline: refine detections, then
/// crop -> enhance -> segment -> paste for every confirmed box.
/// Output for frame t depends only on frames and detections up to t.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, Lane lane = Lane::single);

  FrameOutput process(const GrayImage& frame, std::span<const Detection> detections);

  /// Segments one box of a frame into a frame-sized mask; adds to `timing` when given.
  [[nodiscard]] BinaryMask segment_box(const GrayImage& frame, const BBox& box,
                                       StageTiming* timing = nullptr) const;

  [[nodiscard]] const TrackerState& state() const noexcept { return tracker_.state(); }
  [[nodiscard]] const PipelineConfig& config() const noexcept { return config_; }

 private:
  PipelineConfig config_;
  Lane lane_;
  Tracker tracker_;
};

/// Runs a whole sequence. Throws DataError when frame and detection counts differ.
[[nodiscard]] std::vector<FrameOutput> run_pipeline(const PipelineConfig& config,
                                                    std::span<const GrayImage> frames,
                                                    std::span<const std::vector<Detection>> detections,
                                                    Lane lane = Lane::single);

struct LatencyStats {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

[[nodiscard]] LatencyStats latency_stats(std::vector<double> samples_ms);

/// FNV-1a of the mask bytes, seeded with `basis`.
[[nodiscard]] std::uint64_t mask_digest(const BinaryMask& mask, std::uint64_t basis = 0xcbf29ce484222325ULL);

struct LaneReport {
  LatencyStats track, crop, enhance, segment, paste, total;
  double stage_mean_sum_ms = 0.0;
  double effective_fps = 0.0;  ///< 1000 / mean total
  std::uint64_t mask_digest = 0;  ///< FNV-1a over every output mask, for cross-lane and replay checks
  std::size_t mask_pixels = 0;
};

struct BenchReport {
  int frames = 0;
  int sigmas = 0;
  LaneReport single;
  LaneReport parallel;
  double frame_rate_target = 0.0;
};

/// Renders `n_frames` synthetic frames from config.synth, preloads them with
/// exact ground-truth detections and times the pipeline on both lanes.
/// Throws ConfigError for n_frames < 100 unless `allow_short` is set.
[[nodiscard]] BenchReport bench(const PipelineConfig& config, int n_frames, bool allow_short = false);

[[nodiscard]] std::string format_bench_report(const BenchReport& report);

}  // namespace gwtrack

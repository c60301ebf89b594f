#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gwtrack/hessian.hpp"
#include "gwtrack/mock_detector.hpp"
#include "gwtrack/segmenter.hpp"
#include "gwtrack/synth.hpp"
#include "gwtrack/tracker.hpp"

namespace gwtrack {

struct EvalConfig {
  double difficult_threshold = 0.1;  ///< on the diagonal-normalized Hausdorff distance
  std::vector<double> brightness_grid{0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4};
  std::vector<double> contrast_grid{0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4};
};

/// Every tunable of the system, one section per module.
struct PipelineConfig {
  HessianConfig hessian;
  RefineConfig tracker;
  SegConfig segmenter;
  SynthConfig synth;
  NoiseProfile detector;
  EvalConfig eval;
  int crop_size = 224;
  double frame_rate_target = 35.0;
  bool refine = true;  ///< false: pass raw high-confidence detections straight to segmentation

  /// Throws ConfigError on the first invalid field.
  void validate() const;
};

/// Parses the structured config text (JSON). Missing keys keep their
/// defaults; unknown keys and type errors throw ConfigError.
[[nodiscard]] PipelineConfig parse_config(const std::string& text);
[[nodiscard]] PipelineConfig load_config(const std::filesystem::path& path);

/// Serializes every field, defaults included.
[[nodiscard]] std::string dump_config(const PipelineConfig& config, int indent = 2);

}  // namespace gwtrack

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "gwtrack/geometry.hpp"
#include "gwtrack/image.hpp"
#include "gwtrack/tracker.hpp"

namespace gwtrack {

// ---------------------------------------------------------------------------
// Detection counting
// ---------------------------------------------------------------------------

/// Per-frame detection outcome.
///   tp: some box contains every ground-truth pixel
///   fn: the frame has a wire and no box contains all of it
///   fp: number of boxes containing no ground-truth pixel
struct FrameDetection {
  bool tp = false;
  bool fn = false;
  int fp = 0;
};

struct DetectionTally {
  long tp = 0;
  long fp = 0;         ///< wire-free boxes, counted once each
  long fn = 0;
  long fp_frames = 0;  ///< frames with at least one wire-free box
  std::vector<FrameDetection> per_frame;
};

/// Throws DataError on length or shape mismatches.
[[nodiscard]] DetectionTally tally_detections(std::span<const std::vector<BBox>> boxes_per_frame,
                                              std::span<const BinaryMask> gt_masks);
[[nodiscard]] DetectionTally tally_detections(std::span<const TrackerState> states,
                                              std::span<const BinaryMask> gt_masks);

[[nodiscard]] FrameDetection classify_frame(std::span<const BBox> boxes, const BinaryMask& gt_mask);

// ---------------------------------------------------------------------------
// Segmentation metrics
// ---------------------------------------------------------------------------

struct SegScores {
  double dice = 0.0;
  double sensitivity = 0.0;
  double fdr = 0.0;
  double hd = 0.0;             ///< pixels; +inf when exactly one mask is empty
  double hd_normalized = 0.0;  ///< hd / image diagonal
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Dice, sensitivity, FDR and symmetric Hausdorff distance. Empty-set
/// conventions: both masks empty gives dice 1, sensitivity 1, fdr 0, hd 0;
/// an empty ground truth gives sensitivity 1; an empty prediction gives fdr 0.
/// Throws DataError when shapes differ.
[[nodiscard]] SegScores seg_scores(const BinaryMask& pred, const BinaryMask& gt);

/// Exact squared Euclidean distance from each pixel to the nearest set pixel
/// (+inf everywhere when the mask is empty).
[[nodiscard]] ScalarField squared_distance_transform(const BinaryMask& mask);

/// Symmetric Hausdorff distance in pixels (0 for two empty masks, +inf for one).
[[nodiscard]] double hausdorff_distance(const BinaryMask& a, const BinaryMask& b);

struct PooledScores {
  std::size_t frames = 0;
  double dice = 0.0;
  double sensitivity = 0.0;
  double fdr = 0.0;
  double hd = 0.0;             ///< mean over frames with a finite distance
  double hd_normalized = 0.0;  ///< same
  std::size_t undefined_hd = 0;
};

[[nodiscard]] PooledScores pool(std::span<const SegScores> scores);

struct DifficultSplit {
  std::vector<std::size_t> difficult;
  std::vector<std::size_t> easy;
  PooledScores difficult_scores;
  PooledScores easy_scores;
};

/// Frames whose normalized HD is strictly above `threshold` are difficult.
/// Throws ConfigError for threshold <= 0.
[[nodiscard]] DifficultSplit difficult_split(std::span<const SegScores> per_frame, double threshold = 0.1);

// ---------------------------------------------------------------------------
// Robustness sweep
// ---------------------------------------------------------------------------

/// Segments frame `index` of the dataset (already perturbed) into a frame mask.
using FramePipeline = std::function<BinaryMask(const GrayImage& frame, std::size_t index)>;

struct SweepRow {
  double brightness = 1.0;
  double contrast = 1.0;
  double mean_dice = 0.0;
};

/// 0.6, 0.7, ..., 1.4.
[[nodiscard]] std::vector<double> default_ratio_grid();

/// Applies photometric_perturb at every grid point to every frame, runs the
/// pipeline and records the mean Dice. Rows are brightness-major. Throws
/// ConfigError on empty grids and DataError when frames and masks differ in count.
[[nodiscard]] std::vector<SweepRow> robustness_sweep(const FramePipeline& pipeline,
                                                     std::span<const GrayImage> frames,
                                                     std::span<const BinaryMask> gt_masks,
                                                     std::span<const double> brightness_grid,
                                                     std::span<const double> contrast_grid);

/// Reference pipeline: fixed global intensity threshold inside a box.
struct ThresholdBaseline {
  double threshold = 0.45;

  [[nodiscard]] BinaryMask segment(const GrayImage& frame, const BBox& box) const;

  /// Picks the threshold in [0.05, 0.95] (step 0.01) maximizing mean Dice on unperturbed frames.
  [[nodiscard]] static ThresholdBaseline calibrate(std::span<const GrayImage> frames,
                                                   std::span<const BinaryMask> gt_masks,
                                                   std::span<const BBox> boxes);
};

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

void write_per_frame_csv(std::ostream& os, std::span<const SegScores> scores);
void write_summary_csv(std::ostream& os, const PooledScores& all, const DifficultSplit& split);
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);
void write_tally_csv(std::ostream& os, const DetectionTally& tally);

}  // namespace gwtrack

#pragma once

#include <cstdint>
#include <vector>

#include "gwtrack/geometry.hpp"

namespace gwtrack {

/// Error model of the stand-in detector.
struct NoiseProfile {
  double jitter_px = 0.0;       ///< std of the Gaussian noise added to each box corner
  double drop_rate = 0.0;       ///< probability the true detection is omitted
  double spurious_rate = 0.0;   ///< Poisson mean of spurious boxes per frame
  double spurious_conf_lo = 0.05;
  double spurious_conf_hi = 0.9;
  double true_conf_lo = 0.3;
  double true_conf_hi = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Noisy detections around a ground-truth box. Draws depend only on
/// (profile.rng_seed, frame_index). The true detection, when emitted, is first.
[[nodiscard]] std::vector<Detection> mock_detect(const BBox& gt_box, Dims frame,
                                                 const NoiseProfile& profile, long frame_index);

}  // namespace gwtrack

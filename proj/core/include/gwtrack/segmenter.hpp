#pragma once

#include "gwtrack/geometry.hpp"
#include "gwtrack/hessian.hpp"
#include "gwtrack/image.hpp"

namespace gwtrack {

struct SegConfig {
  double hi_thresh = 0.95;  ///< seed level, fraction of the crop-maximum response
  double lo_thresh = 0.85;  ///< growth level, fraction of the crop-maximum response
  int min_component_px = 30;

  void validate() const;
};

/// Hysteresis segmentation of an enhancement map: 8-connected growth from
/// seeds >= hi * max through pixels >= lo * max, then removal of components
/// smaller than min_component_px.
[[nodiscard]] BinaryMask segment_response(const ScalarField& response, const SegConfig& config = {});

/// Enhancement map of the crop followed by segment_response.
[[nodiscard]] BinaryMask segment_crop(const GrayImage& crop, const SegConfig& config = {},
                                      const HessianConfig& hessian = {});

/// Maps a square crop-space mask back into frame coordinates (nearest
/// neighbour). Frame pixels whose centers fall outside `box` stay background.
[[nodiscard]] BinaryMask paste_mask(const BinaryMask& mask, const BBox& box, Dims frame);

/// Pixels with intensity strictly below `threshold`.
[[nodiscard]] BinaryMask threshold_segment(const GrayImage& image, double threshold);

/// Labels 8-connected components; returns the label count. Background is 0.
int label_components(const BinaryMask& mask, Field<int>& labels);

/// Drops 8-connected components with fewer than `min_size` pixels.
[[nodiscard]] BinaryMask remove_small_components(const BinaryMask& mask, int min_size);

}  // namespace gwtrack

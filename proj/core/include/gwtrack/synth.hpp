#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gwtrack/geometry.hpp"
#include "gwtrack/image.hpp"

namespace gwtrack {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct WireConfig {
  int n_control_points = 6;
  double depth = 0.3;              ///< intensity deficit on the centerline
  double width_sigma = 1.5;        ///< Gaussian cross-section, pixels
  double motion_amplitude = 1.0;   ///< max control-point displacement per frame, pixels
  double radiopaque_fraction = 0.3;  ///< rendered fraction of the spline arclength (tip end)
  double length_fraction = 0.8;    ///< spline chord budget relative to the smaller frame side
};

struct BackgroundConfig {
  int n_blobs = 4;
  double low_freq_scale = 160.0;  ///< shortest wavelength of the smooth field, pixels
  double noise_std = 0.02;
  double mean_level = 0.6;
  double variation = 0.08;  ///< peak amplitude of the smooth field around mean_level
};

struct SynthConfig {
  Dims frame_dims{512, 512};
  int n_frames = 100;
  WireConfig wire;
  BackgroundConfig background;
  std::uint64_t rng_seed = 2024;

  /// Throws ConfigError on invalid fields.
  void validate() const;
};

struct FrameSample {
  GrayImage frame;
  GrayImage background;  ///< same frame rendered without the wire
  BinaryMask mask;
  BBox gt_box;
};

struct SynthSequence {
  std::vector<GrayImage> frames;
  std::vector<BinaryMask> gt_masks;
  std::vector<BBox> gt_boxes;
  std::vector<GrayImage> backgrounds;  ///< wire-free renders, kept only when requested
};

/// Rasterized Gaussian-profile dark ridge along a polyline.
struct WireRaster {
  ScalarField deficit;  ///< depth * exp(-d^2 / (2 sigma^2)), d = distance to the polyline
  BinaryMask mask;      ///< deficit >= depth / 2
};

/// Distances are measured from pixel centers (i + 0.5, j + 0.5).
[[nodiscard]] WireRaster rasterize_wire(Dims dims, const std::vector<Point2>& polyline,
                                        double depth, double width_sigma);

/// Dense Catmull-Rom curve through the control points.
[[nodiscard]] std::vector<Point2> catmull_rom(const std::vector<Point2>& control,
                                              int samples_per_segment = 24);

/// Tail of a polyline covering `fraction` of its arclength.
[[nodiscard]] std::vector<Point2> polyline_tail(const std::vector<Point2>& polyline, double fraction);

/// Random-access, seed-deterministic renderer for a synthetic sequence.
class SequenceRenderer {
 public:
  explicit SequenceRenderer(SynthConfig config);

  [[nodiscard]] const SynthConfig& config() const noexcept { return config_; }
  [[nodiscard]] const GrayImage& smooth_background() const noexcept { return smooth_; }

  /// Control points after applying the frame's motion.
  [[nodiscard]] std::vector<Point2> control_points(int frame_index) const;
  /// Radiopaque part of the centerline for a frame.
  [[nodiscard]] std::vector<Point2> visible_centerline(int frame_index) const;

  [[nodiscard]] FrameSample render(int frame_index) const;
  /// Geometry only: mask and gt box, no intensity rendering.
  [[nodiscard]] std::pair<BinaryMask, BBox> ground_truth(int frame_index) const;

 private:
  SynthConfig config_;
  GrayImage smooth_;
  std::vector<Point2> base_control_;
  std::vector<Point2> phases_;
  double motion_radius_ = 0.0;
  double motion_omega_ = 0.0;
};

[[nodiscard]] SynthSequence render_sequence(const SynthConfig& config, bool keep_backgrounds = false);

/// Transfers the wire of `wire_image` onto `background`: the deficit of each
/// mask pixel relative to the median of the unmasked pixels on the surrounding
/// 15x15 ring is subtracted from the new background. Throws DataError on shape mismatch.
[[nodiscard]] std::pair<GrayImage, BinaryMask> fuse_guidewire(const GrayImage& wire_image,
                                                              const BinaryMask& wire_mask,
                                                              const GrayImage& background);

struct ElasticParams {
  double amplitude = 4.0;      ///< bound on each node offset, pixels (Gaussian draws, std amplitude / 3, clamped)
  double grid_spacing = 32.0;  ///< control grid pitch, pixels
  bool boundary_fixed = true;
  std::uint64_t seed = 0;
};

/// Dense displacement field of an elastic deformation (x and y components).
struct DisplacementField {
  ScalarField dx;
  ScalarField dy;
};

[[nodiscard]] DisplacementField elastic_field(Dims dims, const ElasticParams& params);

/// Backward warp: output(p) = input(p + d(p)); image bilinear, mask nearest.
[[nodiscard]] std::pair<GrayImage, BinaryMask> elastic_deform(const GrayImage& image,
                                                              const BinaryMask& mask,
                                                              const ElasticParams& params);

/// clamp(contrast * (image - mean) + mean * brightness, 0, 1). Throws ConfigError for ratios <= 0.
[[nodiscard]] GrayImage photometric_perturb(const GrayImage& image, double brightness_ratio,
                                            double contrast_ratio);

/// Straight dark line through the image center at `angle_deg` on a flat
/// background with optional Gaussian noise; mask is the half-depth region.
struct LineImage {
  GrayImage image;
  GrayImage clean;
  BinaryMask mask;
  BinaryMask centerline;  ///< pixels within 0.5 px of the line
};

struct LineSpec {
  Dims dims{224, 224};
  double angle_deg = 0.0;
  double depth = 0.3;
  double width_sigma = 1.5;
  double background = 0.6;
  double noise_std = 0.02;
  double offset = 0.0;  ///< signed shift of the line from the image center along its normal
  std::uint64_t seed = 0;
};

[[nodiscard]] LineImage render_line(const LineSpec& spec);

}  // namespace gwtrack

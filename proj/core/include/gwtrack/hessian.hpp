#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gwtrack/image.hpp"

namespace gwtrack {

/// Which ridge polarity the enhancement responds to. Guidewires are dark on
/// fluoroscopy, which makes the larger eigenvalue positive on the wire.
enum class Polarity { dark, bright };

/// Gaussian scales (pixels) used to build the multi-scale feature maps.
struct ScaleBank {
  std::vector<double> sigmas{1.0, 1.5, 2.0, 3.0};

  /// Throws ConfigError unless the list is non-empty, positive and strictly increasing.
  void validate() const;
};

struct HessianConfig {
  ScaleBank scales;
  double tau_j = 0.75;  ///< cutoff fraction of the frame maximum used to regularize the response
  double alpha = 0.5;   ///< fusion weight
  Polarity polarity = Polarity::dark;
  bool parallel_scales = false;  ///< process scales on worker threads; output is bit-identical

  void validate() const;
};

/// Second-order gradients of one feature map.
struct HessianField {
  ScalarField d_xx;
  ScalarField d_xy;
  ScalarField d_yy;
};

struct EigenPair {
  double lambda1 = 0.0;  ///< smaller eigenvalue
  double lambda2 = 0.0;  ///< larger eigenvalue
};

/// Closed-form eigenvalues of the symmetric matrix [dxx dxy; dxy dyy].
[[nodiscard]] EigenPair symmetric_eigenvalues(double dxx, double dxy, double dyy) noexcept;

/// Per-scale eigenvalue maps plus the fused multi-scale enhancement map.
struct EigenMaps {
  std::vector<double> sigmas;
  std::vector<ScalarField> lambda1;
  std::vector<ScalarField> lambda2;
  ScalarField enhancement;  ///< values in [0,1], per-pixel maximum over scales
};

/// Normalized, truncated (radius ceil(3 sigma)) sampled Gaussian. Index `radius` is the center tap.
[[nodiscard]] std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian smoothing with reflect padding. Throws ConfigError for sigma <= 0.
[[nodiscard]] GrayImage gaussian_smooth(const GrayImage& image, double sigma);

/// Central difference along x with the frozen kernel [0.5, 0, -0.5], reflect padding:
/// out(x, y) = 0.5 * (f(x+1, y) - f(x-1, y)).
[[nodiscard]] ScalarField diff_x(const GrayImage& field);
[[nodiscard]] ScalarField diff_x(const ScalarField& field);
/// Same along y.
[[nodiscard]] ScalarField diff_y(const GrayImage& field);
[[nodiscard]] ScalarField diff_y(const ScalarField& field);

/// D_xx = Dx(Dx f), D_xy = Dy(Dx f), D_yy = Dy(Dy f).
[[nodiscard]] HessianField second_gradients(const GrayImage& feature);

/// Per-pixel closed-form eigenvalues; returns (lambda1, lambda2) with lambda1 <= lambda2.
[[nodiscard]] std::pair<ScalarField, ScalarField> eigen_maps(const HessianField& h);

/// Ridge strength fed to the enhancement function: lambda2 for dark ridges,
/// -lambda1 for bright ones.
[[nodiscard]] ScalarField ridge_strength(const ScalarField& lambda1, const ScalarField& lambda2,
                                         Polarity polarity);

/// Regularized piecewise enhancement of a single scale's ridge-strength field.
[[nodiscard]] ScalarField enhancement_response(const ScalarField& ridge, double tau_j);

/// Per-pixel maximum of the per-scale responses. Throws std::invalid_argument on empty input.
[[nodiscard]] ScalarField enhancement_response(std::span<const ScalarField> ridge_per_scale,
                                               double tau_j);

/// clamp(image - alpha * enhancement) for dark polarity, clamp(image + alpha * enhancement)
/// for bright. Throws DataError on a shape mismatch and ConfigError for alpha outside [0,1].
[[nodiscard]] GrayImage fuse(const GrayImage& image, const ScalarField& enhancement, double alpha,
                             Polarity polarity = Polarity::dark);

struct EnhanceResult {
  GrayImage fused;
  EigenMaps maps;
};

/// Smooth -> second gradients -> eigenvalues -> enhancement -> fusion.
[[nodiscard]] EnhanceResult enhance(const GrayImage& image, const HessianConfig& config = {});

/// Enhancement map only (no fusion, per-scale maps discarded).
[[nodiscard]] ScalarField enhancement_map(const GrayImage& image, const HessianConfig& config = {});

}  // namespace gwtrack

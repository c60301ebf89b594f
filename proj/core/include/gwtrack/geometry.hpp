#pragma once

#include <span>
#include <optional>
#include <vector>

#include "gwtrack/image.hpp"

namespace gwtrack {

/// Axis-aligned box in continuous pixel coordinates.
///
/// Pixel (i, j) covers [i, i+1) x [j, j+1); it belongs to a box when its
/// center (i + 0.5, j + 0.5) lies in the half-open box [x_min, x_max) x [y_min, y_max).
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  [[nodiscard]] double width() const noexcept { return x_max - x_min; }
  [[nodiscard]] double height() const noexcept { return y_max - y_min; }
  [[nodiscard]] double area() const noexcept;
  [[nodiscard]] bool valid() const noexcept;
  [[nodiscard]] bool contains_pixel(int x, int y) const noexcept;
  [[nodiscard]] bool contains(const BBox& other) const noexcept;

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Detection {
  BBox box;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct Dims {
  int width = 0;
  int height = 0;

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Intersection over union; 0 when the union has zero area.
[[nodiscard]] double iou(const BBox& a, const BBox& b) noexcept;

[[nodiscard]] double intersection_area(const BBox& a, const BBox& b) noexcept;

/// Union hull of a non-empty list of boxes. Throws std::invalid_argument on empty input.
[[nodiscard]] BBox merge_boxes(std::span<const BBox> boxes);

/// Tight box of the set pixels (pixel-center rasterization), or nullopt for an empty mask.
[[nodiscard]] std::optional<BBox> tight_box(const BinaryMask& mask);

/// Square region of the frame sampled by a crop and its mapping to crop pixels.
///
/// Crop pixel (u, v) has its center at frame coordinate
/// (x0 + (u + 0.5) * scale_x, y0 + (v + 0.5) * scale_y).
struct CropWindow {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  int out_size = 0;

  [[nodiscard]] double scale_x() const noexcept { return (x1 - x0) / out_size; }
  [[nodiscard]] double scale_y() const noexcept { return (y1 - y0) / out_size; }
};

/// Squares the box about its center, shifts it inside the frame when it
/// fits and intersects with the frame otherwise. Throws DataError when the
/// box does not intersect the frame.
[[nodiscard]] CropWindow crop_window(Dims frame, const BBox& box, int out_size);

/// Bilinear resample of the crop window to out_size x out_size.
[[nodiscard]] GrayImage crop(const GrayImage& image, const BBox& box, int out_size = 224);
[[nodiscard]] GrayImage crop(const GrayImage& image, const CropWindow& window);

/// Bilinear sample at continuous pixel-index coordinates with edge clamping.
[[nodiscard]] double sample_bilinear(const GrayImage& image, double x, double y) noexcept;

}  // namespace gwtrack

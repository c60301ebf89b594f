#include "gwtrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gwtrack/errors.hpp"

namespace gwtrack {

double BBox::area() const noexcept {
  return std::max(0.0, width()) * std::max(0.0, height());
}

bool BBox::valid() const noexcept {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

bool BBox::contains_pixel(int x, int y) const noexcept {
  const double cx = x + 0.5;
  const double cy = y + 0.5;
  return cx >= x_min && cx < x_max && cy >= y_min && cy < y_max;
}

bool BBox::contains(const BBox& other) const noexcept {
  return other.x_min >= x_min && other.y_min >= y_min && other.x_max <= x_max &&
         other.y_max <= y_max;
}

double intersection_area(const BBox& a, const BBox& b) noexcept {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) noexcept {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BBox merge_boxes(std::span<const BBox> boxes) {
  if (boxes.empty()) throw std::invalid_argument("merge_boxes: empty box list");
  BBox hull = boxes.front();
  for (const BBox& b : boxes.subspan(1)) {
    hull.x_min = std::min(hull.x_min, b.x_min);
    hull.y_min = std::min(hull.y_min, b.y_min);
    hull.x_max = std::max(hull.x_max, b.x_max);
    hull.y_max = std::max(hull.y_max, b.y_max);
  }
  return hull;
}

std::optional<BBox> tight_box(const BinaryMask& mask) {
  int x_lo = mask.width(), y_lo = mask.height(), x_hi = -1, y_hi = -1;
  for (int y = 0; y < mask.height(); ++y) {
    const auto row = mask.row(y);
    for (int x = 0; x < mask.width(); ++x) {
      if (row[x] == 0) continue;
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (x_hi < 0) return std::nullopt;
  return BBox{static_cast<double>(x_lo), static_cast<double>(y_lo), x_hi + 1.0, y_hi + 1.0};
}

namespace {

// Places an interval of length `side` centered at `center` inside [0, limit].
std::pair<double, double> fit_interval(double center, double side, double limit) {
  if (side >= limit) return {0.0, limit};
  double lo = center - side / 2.0;
  lo = std::clamp(lo, 0.0, limit - side);
  return {lo, lo + side};
}

}  // namespace

CropWindow crop_window(Dims frame, const BBox& box, int out_size) {
  if (out_size <= 0) throw std::invalid_argument("crop: out_size must be positive");
  if (!box.valid()) throw DataError("crop: invalid box");
  if (frame.width <= 0 || frame.height <= 0) throw DataError("crop: empty frame");
  if (box.x_max <= 0.0 || box.y_max <= 0.0 || box.x_min >= frame.width ||
      box.y_min >= frame.height) {
    throw DataError("crop: box [" + std::to_string(box.x_min) + ", " + std::to_string(box.y_min) +
                    ", " + std::to_string(box.x_max) + ", " + std::to_string(box.y_max) +
                    "] lies outside the frame");
  }
  const double side = std::max({box.width(), box.height(), 1.0});
  const auto [x0, x1] = fit_interval((box.x_min + box.x_max) / 2.0, side, frame.width);
  const auto [y0, y1] = fit_interval((box.y_min + box.y_max) / 2.0, side, frame.height);
  return CropWindow{x0, y0, x1, y1, out_size};
}

double sample_bilinear(const GrayImage& image, double x, double y) noexcept {
  const int w = image.width();
  const int h = image.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int ix = std::min(static_cast<int>(x), w - 1);
  const int iy = std::min(static_cast<int>(y), h - 1);
  const int jx = std::min(ix + 1, w - 1);
  const int jy = std::min(iy + 1, h - 1);
  const double fx = x - ix;
  const double fy = y - iy;
  const double top = (1.0 - fx) * image(ix, iy) + fx * image(jx, iy);
  const double bottom = (1.0 - fx) * image(ix, jy) + fx * image(jx, jy);
  return (1.0 - fy) * top + fy * bottom;
}

GrayImage crop(const GrayImage& image, const CropWindow& window) {
  const int n = window.out_size;
  GrayImage out(n, n);
  const double sx = window.scale_x();
  const double sy = window.scale_y();
  for (int v = 0; v < n; ++v) {
    const double fy = window.y0 + (v + 0.5) * sy - 0.5;
    auto row = out.row(v);
    for (int u = 0; u < n; ++u) {
      const double fx = window.x0 + (u + 0.5) * sx - 0.5;
      row[u] = static_cast<float>(sample_bilinear(image, fx, fy));
    }
  }
  return out;
}

GrayImage crop(const GrayImage& image, const BBox& box, int out_size) {
  return crop(image, crop_window({image.width(), image.height()}, box, out_size));
}

}  // namespace gwtrack

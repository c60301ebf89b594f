#include "gwtrack/segmenter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "gwtrack/errors.hpp"

namespace gwtrack {

namespace {

constexpr std::array<std::pair<int, int>, 8> kNeighbours{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

}  // namespace

void SegConfig::validate() const {
  if (!(lo_thresh > 0.0 && lo_thresh < hi_thresh && hi_thresh <= 1.0)) {
    throw ConfigError("segmenter: thresholds must satisfy 0 < lo_thresh < hi_thresh <= 1");
  }
  if (min_component_px < 0) throw ConfigError("segmenter: min_component_px must be >= 0");
}

int label_components(const BinaryMask& mask, Field<int>& labels) {
  const int w = mask.width();
  const int h = mask.height();
  labels = Field<int>(w, h, 0);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(x, y) == 0 || labels(x, y) != 0) continue;
      ++next;
      labels(x, y) = next;
      stack.assign(1, {x, y});
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (const auto& [dx, dy] : kNeighbours) {
          const int nx = cx + dx;
          const int ny = cy + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          if (mask(nx, ny) == 0 || labels(nx, ny) != 0) continue;
          labels(nx, ny) = next;
          stack.emplace_back(nx, ny);
        }
      }
    }
  }
  return next;
}

BinaryMask remove_small_components(const BinaryMask& mask, int min_size) {
  if (min_size <= 1) return mask;
  Field<int> labels;
  const int n = label_components(mask, labels);
  std::vector<int> sizes(static_cast<std::size_t>(n) + 1, 0);
  for (int l : labels.pixels()) ++sizes[static_cast<std::size_t>(l)];
  BinaryMask out(mask.width(), mask.height(), 0);
  auto dst = out.pixels();
  const auto lab = labels.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = lab[i] != 0 && sizes[static_cast<std::size_t>(lab[i])] >= min_size ? 1 : 0;
  }
  return out;
}

BinaryMask segment_response(const ScalarField& response, const SegConfig& config) {
  config.validate();
  const int w = response.width();
  const int h = response.height();
  BinaryMask mask(w, h, 0);
  if (response.empty()) return mask;
  const double peak = *std::max_element(response.pixels().begin(), response.pixels().end());
  if (!(peak > 0.0)) return mask;
  const double hi = config.hi_thresh * peak;
  const double lo = config.lo_thresh * peak;

  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (response(x, y) >= hi && mask(x, y) == 0) {
        mask(x, y) = 1;
        stack.emplace_back(x, y);
      }
    }
  }
  while (!stack.empty()) {
    const auto [cx, cy] = stack.back();
    stack.pop_back();
    for (const auto& [dx, dy] : kNeighbours) {
      const int nx = cx + dx;
      const int ny = cy + dy;
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      if (mask(nx, ny) != 0 || response(nx, ny) < lo) continue;
      mask(nx, ny) = 1;
      stack.emplace_back(nx, ny);
    }
  }
  return remove_small_components(mask, config.min_component_px);
}

BinaryMask segment_crop(const GrayImage& crop, const SegConfig& config,
                        const HessianConfig& hessian) {
  return segment_response(enhancement_map(crop, hessian), config);
}

BinaryMask paste_mask(const BinaryMask& mask, const BBox& box, Dims frame) {
  if (mask.width() != mask.height() || mask.empty()) {
    throw DataError("paste_mask: crop mask must be square and non-empty");
  }
  const CropWindow window = crop_window(frame, box, mask.width());
  const int n = window.out_size;
  const double sx = window.scale_x();
  const double sy = window.scale_y();
  BinaryMask out(frame.width, frame.height, 0);
  const int x_begin = std::max(0, static_cast<int>(std::floor(box.x_min - 0.5)));
  const int y_begin = std::max(0, static_cast<int>(std::floor(box.y_min - 0.5)));
  const int x_end = std::min(frame.width, static_cast<int>(std::ceil(box.x_max)) + 1);
  const int y_end = std::min(frame.height, static_cast<int>(std::ceil(box.y_max)) + 1);
  for (int y = y_begin; y < y_end; ++y) {
    for (int x = x_begin; x < x_end; ++x) {
      if (!box.contains_pixel(x, y)) continue;
      const int u = std::clamp(static_cast<int>(std::floor((x + 0.5 - window.x0) / sx)), 0, n - 1);
      const int v = std::clamp(static_cast<int>(std::floor((y + 0.5 - window.y0) / sy)), 0, n - 1);
      out(x, y) = mask(u, v);
    }
  }
  return out;
}

BinaryMask threshold_segment(const GrayImage& image, double threshold) {
  BinaryMask out(image.width(), image.height(), 0);
  const auto in = image.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < in.size(); ++i) dst[i] = in[i] < threshold ? 1 : 0;
  return out;
}

}  // namespace gwtrack

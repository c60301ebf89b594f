#include "gwtrack/image.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gwtrack {

std::size_t count_set(const BinaryMask& mask) noexcept {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(), [](std::uint8_t v) { return v != 0; }));
}

void merge_into(BinaryMask& dst, const BinaryMask& src) {
  if (!dst.same_shape(src)) throw std::invalid_argument("merge_into: mask shape mismatch");
  auto d = dst.pixels();
  auto s = src.pixels();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<std::uint8_t>(d[i] | s[i]);
}

double mean_intensity(const GrayImage& image) noexcept {
  if (image.empty()) return 0.0;
  double sum = 0.0;
  for (float v : image.pixels()) sum += v;
  return sum / static_cast<double>(image.size());
}

GrayImage clamped_unit(GrayImage image) noexcept {
  for (float& v : image.pixels()) v = std::clamp(v, 0.0F, 1.0F);
  return image;
}

}  // namespace gwtrack

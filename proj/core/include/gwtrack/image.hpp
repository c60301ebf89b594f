#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gwtrack {

/// Row-major 2D field of scalars.
///
/// Intensity images use `float` storage (IO normalizes to [0,1]); derived
/// quantities such as second derivatives and eigenvalues use `double`.
template <typename T>
class Field {
 public:
  using value_type = T;

  Field() = default;
  Field(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    assert(width >= 0 && height >= 0);
  }
  Field(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    assert(data_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  }

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] T& operator()(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  [[nodiscard]] const T& operator()(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  [[nodiscard]] std::span<T> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  [[nodiscard]] std::span<const T> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  [[nodiscard]] std::span<T> pixels() noexcept { return data_; }
  [[nodiscard]] std::span<const T> pixels() const noexcept { return data_; }

  [[nodiscard]] bool same_shape(int width, int height) const noexcept {
    return width_ == width && height_ == height;
  }
  template <typename U>
  [[nodiscard]] bool same_shape(const Field<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Field<float>;
using ScalarField = Field<double>;

/// Boolean occupancy grid; one byte per pixel, 0 or 1.
using BinaryMask = Field<std::uint8_t>;

[[nodiscard]] std::size_t count_set(const BinaryMask& mask) noexcept;

/// Element-wise OR; shapes must match.
void merge_into(BinaryMask& dst, const BinaryMask& src);

/// Arithmetic mean of all pixels; 0 for an empty image.
[[nodiscard]] double mean_intensity(const GrayImage& image) noexcept;

/// Returns a copy with every pixel clamped to [0,1].
[[nodiscard]] GrayImage clamped_unit(GrayImage image) noexcept;

}  // namespace gwtrack

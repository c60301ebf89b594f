#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "gwtrack/errors.hpp"
#include "gwtrack/geometry.hpp"
#include "gwtrack/image.hpp"

namespace gwtrack {
namespace {

BBox random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 100.0);
  std::uniform_real_distribution<double> len(0.5, 40.0);
  const double x = pos(rng), y = pos(rng);
  return {x, y, x + len(rng), y + len(rng)};
}

TEST(Iou, IdenticalBoxesScoreOne) {
  EXPECT_DOUBLE_EQ(iou({3, 4, 10, 20}, {3, 4, 10, 20}), 1.0);
}

TEST(Iou, DisjointBoxesScoreZero) {
  EXPECT_EQ(iou({0, 0, 10, 10}, {20, 20, 30, 30}), 0.0);
}

TEST(Iou, HalfShiftedSquare) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 15, 10}), 1.0 / 3.0);
}

TEST(Iou, DegenerateUnionIsZero) {
  EXPECT_EQ(iou({1, 1, 1, 1}, {1, 1, 1, 1}), 0.0);
}

TEST(Iou, SymmetricBoundedAndOneOnlyForEqualBoxes) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5000; ++i) {
    const BBox a = random_box(rng), b = random_box(rng);
    const double ab = iou(a, b);
    EXPECT_EQ(ab, iou(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    if (a != b) EXPECT_LT(ab, 1.0);
  }
}

TEST(MergeBoxes, Singleton) {
  const BBox b{1, 2, 3, 4};
  EXPECT_EQ(merge_boxes(std::vector{b}), b);
}

TEST(MergeBoxes, Hull) {
  EXPECT_EQ(merge_boxes(std::vector<BBox>{{0, 0, 5, 5}, {3, 3, 10, 10}}), (BBox{0, 0, 10, 10}));
  EXPECT_EQ(merge_boxes(std::vector<BBox>{{0, 0, 4, 4}, {0, 0, 4, 4}}), (BBox{0, 0, 4, 4}));
}

TEST(MergeBoxes, EmptyInputIsACallerError) {
  EXPECT_THROW((void)merge_boxes(std::vector<BBox>{}), std::invalid_argument);
}

TEST(MergeBoxes, OrderInvariantIdempotentAndCovering) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 500; ++t) {
    std::vector<BBox> boxes(1 + t % 7);
    for (auto& b : boxes) b = random_box(rng);
    const BBox m = merge_boxes(boxes);
    std::shuffle(boxes.begin(), boxes.end(), rng);
    EXPECT_EQ(merge_boxes(boxes), m);
    EXPECT_EQ(merge_boxes(std::vector{m, m}), m);
    for (const BBox& b : boxes) EXPECT_TRUE(m.contains(b));
  }
}

TEST(BBox, PixelCenterInclusionIsHalfOpen) {
  const BBox b{2, 2, 5, 5};
  EXPECT_TRUE(b.contains_pixel(2, 2));
  EXPECT_TRUE(b.contains_pixel(4, 4));
  EXPECT_FALSE(b.contains_pixel(5, 4));
  EXPECT_FALSE(b.contains_pixel(1, 3));
  // center 4.5 is outside [2, 4.5)
  EXPECT_FALSE((BBox{2, 2, 4.5, 4.5}).contains_pixel(4, 4));
}

TEST(TightBox, CoversSetPixelsExactly) {
  BinaryMask m(10, 8, 0);
  EXPECT_FALSE(tight_box(m).has_value());
  m(2, 3) = 1;
  m(6, 5) = 1;
  const auto b = tight_box(m);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(*b, (BBox{2, 3, 7, 6}));
}

GrayImage ramp_image(int w, int h) {
  GrayImage im(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) im(x, y) = static_cast<float>((x * 7 + y * 13) % 97) / 97.0F;
  }
  return im;
}

TEST(Crop, FullFrameBoxIsIdentity) {
  const GrayImage im = ramp_image(64, 64);
  EXPECT_EQ(crop(im, BBox{0, 0, 64, 64}, 64), im);
}

TEST(Crop, ConstantImageStaysConstant) {
  const GrayImage im(80, 60, 0.375F);
  const GrayImage c = crop(im, BBox{10, 5, 47, 31}, 224);
  ASSERT_EQ(c.width(), 224);
  ASSERT_EQ(c.height(), 224);
  for (float v : c.pixels()) EXPECT_FLOAT_EQ(v, 0.375F);
}

TEST(Crop, StepEdgeLandsAtDoubledColumn) {
  GrayImage im(512, 512, 0.0F);
  // region x in [100, 212); edge at region column 56
  for (int y = 0; y < 512; ++y) {
    for (int x = 156; x < 512; ++x) im(x, y) = 1.0F;
  }
  const GrayImage c = crop(im, BBox{100, 100, 212, 212}, 224);
  int edge = -1;
  for (int u = 0; u < 224; ++u) {
    if (c(u, 100) >= 0.5F) {
      edge = u;
      break;
    }
  }
  EXPECT_NEAR(edge, 112, 1);
}

TEST(Crop, BoxOutsideFrameIsAnError) {
  const GrayImage im(32, 32, 0.5F);
  EXPECT_THROW((void)crop(im, BBox{40, 40, 50, 50}, 16), DataError);
  EXPECT_THROW((void)crop(im, BBox{5, 5, 4, 9}, 16), DataError);
}

TEST(CropWindow, SquaresAboutTheCenter) {
  const CropWindow w = crop_window({512, 512}, BBox{100, 200, 140, 300}, 224);
  EXPECT_DOUBLE_EQ(w.x1 - w.x0, 100.0);
  EXPECT_DOUBLE_EQ(w.y1 - w.y0, 100.0);
  EXPECT_DOUBLE_EQ(0.5 * (w.x0 + w.x1), 120.0);
  EXPECT_DOUBLE_EQ(0.5 * (w.y0 + w.y1), 250.0);
}

TEST(CropWindow, ShiftsInsideTheFrameWithoutShrinking) {
  const CropWindow w = crop_window({512, 512}, BBox{0, 480, 20, 512}, 224);
  EXPECT_DOUBLE_EQ(w.x0, 0.0);
  EXPECT_DOUBLE_EQ(w.x1, 32.0);
  EXPECT_DOUBLE_EQ(w.y1, 512.0);
  EXPECT_DOUBLE_EQ(w.y0, 480.0);
}

TEST(CropWindow, OversizedBoxIsIntersectedWithTheFrame) {
  const CropWindow w = crop_window({100, 60}, BBox{-10, -10, 110, 70}, 50);
  EXPECT_DOUBLE_EQ(w.x0, 0.0);
  EXPECT_DOUBLE_EQ(w.x1, 100.0);
  EXPECT_DOUBLE_EQ(w.y0, 0.0);
  EXPECT_DOUBLE_EQ(w.y1, 60.0);
}

TEST(CropWindow, ContainsTheBoxWheneverItFits) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const double x0 = 500 * u(rng), y0 = 500 * u(rng);
    const BBox b{x0, y0, std::min(512.0, x0 + 1 + 200 * u(rng)), std::min(512.0, y0 + 1 + 200 * u(rng))};
    const CropWindow w = crop_window({512, 512}, b, 224);
    // window edges are recomputed from center and half-side, so allow rounding
    EXPECT_LE(w.x0, b.x_min + 1e-9);
    EXPECT_LE(w.y0, b.y_min + 1e-9);
    EXPECT_GE(w.x1, b.x_max - 1e-9);
    EXPECT_GE(w.y1, b.y_max - 1e-9);
    EXPECT_GE(w.x0, 0.0);
    EXPECT_LE(w.x1, 512.0);
  }
}

TEST(Image, CountMergeMeanClamp) {
  BinaryMask a(4, 3, 0), b(4, 3, 0);
  a(0, 0) = 1;
  b(3, 2) = 1;
  merge_into(a, b);
  EXPECT_EQ(count_set(a), 2U);
  BinaryMask other(3, 4, 0);
  EXPECT_THROW(merge_into(a, other), std::invalid_argument);

  GrayImage im(2, 2, std::vector<float>{-0.5F, 0.25F, 0.75F, 1.5F});
  EXPECT_DOUBLE_EQ(mean_intensity(im), 0.5);
  const GrayImage c = clamped_unit(im);
  EXPECT_EQ(c(0, 0), 0.0F);
  EXPECT_EQ(c(1, 1), 1.0F);
  EXPECT_EQ(mean_intensity(GrayImage{}), 0.0);
}

}  // namespace
}  // namespace gwtrack

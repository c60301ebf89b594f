#include <gtest/gtest.h>

#include <cmath>

#include "gwtrack/errors.hpp"
#include "gwtrack/segmenter.hpp"
#include "gwtrack/synth.hpp"

namespace gwtrack {
namespace {

SynthConfig small_config(int frames = 6) {
  SynthConfig c;
  c.frame_dims = {256, 256};
  c.n_frames = frames;
  return c;
}

TEST(Synth, StaticWireKeepsItsBox) {
  SynthConfig c = small_config(8);
  c.wire.motion_amplitude = 0.0;
  const SynthSequence s = render_sequence(c);
  for (const BBox& b : s.gt_boxes) EXPECT_EQ(b, s.gt_boxes.front());
}

TEST(Synth, MotionPerFrameStaysWithinTheAmplitude) {
  SynthConfig c = small_config();
  c.wire.motion_amplitude = 2.0;
  const SequenceRenderer r(c);
  double largest = 0.0;
  for (int i = 0; i < 60; ++i) {
    const auto p = r.control_points(i), q = r.control_points(i + 1);
    ASSERT_EQ(p.size(), q.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double step = std::hypot(p[k].x - q[k].x, p[k].y - q[k].y);
      EXPECT_LE(step, 2.0 + 1e-9);
      largest = std::max(largest, step);
    }
  }
  EXPECT_GT(largest, 0.0);
}

TEST(Synth, NoiselessFrameIsBackgroundMinusDeficit) {
  SynthConfig c = small_config(3);
  c.background.noise_std = 0.0;
  c.background.n_blobs = 0;
  const SequenceRenderer r(c);
  for (int i = 0; i < 3; ++i) {
    const FrameSample s = r.render(i);
    const WireRaster w = rasterize_wire(c.frame_dims, r.visible_centerline(i), c.wire.depth, c.wire.width_sigma);
    EXPECT_EQ(s.background, r.smooth_background());
    double deepest = 0.0;
    for (std::size_t k = 0; k < s.frame.size(); ++k) {
      EXPECT_NEAR(s.frame.pixels()[k], s.background.pixels()[k] - w.deficit.pixels()[k], 1e-6);
      deepest = std::max(deepest, static_cast<double>(s.background.pixels()[k] - s.frame.pixels()[k]));
    }
    // the centerline passes close to some pixel center
    EXPECT_NEAR(deepest, c.wire.depth, 0.02);
  }
}

TEST(Synth, SameSeedIsBitIdentical) {
  const SynthSequence a = render_sequence(small_config());
  const SynthSequence b = render_sequence(small_config());
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.gt_masks, b.gt_masks);
  EXPECT_EQ(a.gt_boxes, b.gt_boxes);
  SynthConfig other = small_config();
  other.rng_seed += 1;
  EXPECT_NE(render_sequence(other).frames, a.frames);
}

TEST(Synth, RandomAccessMatchesSequentialRendering) {
  const SynthConfig c = small_config();
  const SynthSequence seq = render_sequence(c);
  const SequenceRenderer r(c);
  EXPECT_EQ(r.render(4).frame, seq.frames[4]);
  EXPECT_EQ(r.ground_truth(2).first, seq.gt_masks[2]);
}

TEST(Synth, GroundTruthInvariants) {
  const SynthConfig c = small_config(10);
  const SequenceRenderer r(c);
  for (int i = 0; i < 10; ++i) {
    const FrameSample s = r.render(i);
    ASSERT_GT(count_set(s.mask), 0U);
    EXPECT_EQ(tight_box(s.mask), s.gt_box);
    for (std::size_t k = 0; k < s.mask.size(); ++k) {
      if (s.mask.pixels()[k]) EXPECT_LT(s.frame.pixels()[k], s.background.pixels()[k]);
    }
    Field<int> labels;
    EXPECT_EQ(label_components(s.mask, labels), 1) << "frame " << i;
  }
}

TEST(Synth, ConfigValidation) {
  const auto rejects = [](auto mutate) {
    SynthConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  EXPECT_NO_THROW(SynthConfig{}.validate());
  rejects([](SynthConfig& c) { c.wire.depth = 0.0; });
  rejects([](SynthConfig& c) { c.wire.depth = 1.0; });
  rejects([](SynthConfig& c) { c.wire.width_sigma = 0.0; });
  rejects([](SynthConfig& c) { c.wire.motion_amplitude = -1.0; });
  rejects([](SynthConfig& c) { c.wire.n_control_points = 1; });
  rejects([](SynthConfig& c) { c.wire.radiopaque_fraction = 0.0; });
  rejects([](SynthConfig& c) { c.background.noise_std = -0.1; });
  rejects([](SynthConfig& c) { c.background.mean_level = 1.0; });
  rejects([](SynthConfig& c) { c.frame_dims = {0, 10}; });
  EXPECT_THROW(SequenceRenderer([] {
                 SynthConfig c;
                 c.wire.depth = 2.0;
                 return c;
               }()),
               ConfigError);
}

TEST(Rasterize, DeficitProfileAndHalfDepthMask) {
  const std::vector<Point2> line{{0.0, 20.5}, {40.0, 20.5}};
  const WireRaster w = rasterize_wire({40, 40}, line, 0.3, 1.5);
  EXPECT_NEAR(w.deficit(10, 20), 0.3, 1e-12);
  EXPECT_NEAR(w.deficit(10, 22), 0.3 * std::exp(-4.0 / (2 * 2.25)), 1e-12);
  // half depth at d = 1.5 * sqrt(2 ln 2) = 1.77
  EXPECT_EQ(w.mask(10, 21), 1);
  EXPECT_EQ(w.mask(10, 22), 0);
}

TEST(FuseGuidewire, EmptyMaskReturnsTheBackground) {
  const GrayImage src(32, 32, 0.3F), bg(32, 32, 0.55F);
  const auto [out, mask] = fuse_guidewire(src, BinaryMask(32, 32, 0), bg);
  EXPECT_EQ(out, bg);
  EXPECT_EQ(count_set(mask), 0U);
}

TEST(FuseGuidewire, FlatDeficitIsTransferred) {
  GrayImage src(40, 40, 0.6F);
  BinaryMask mask(40, 40, 0);
  for (int x = 5; x < 35; ++x) {
    src(x, 20) = 0.3F;
    mask(x, 20) = 1;
  }
  const auto [out, carried] = fuse_guidewire(src, mask, GrayImage(40, 40, 0.7F));
  EXPECT_EQ(carried, mask);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) EXPECT_NEAR(out(x, y), mask(x, y) ? 0.4F : 0.7F, 1e-6);
  }
}

TEST(FuseGuidewire, NeverBrightensAndChecksShapes) {
  const SequenceRenderer a(small_config());
  SynthConfig other = small_config();
  other.rng_seed = 99;
  const SequenceRenderer b(other);
  const FrameSample src = a.render(0), dst = b.render(3);
  const auto [out, mask] = fuse_guidewire(src.frame, src.mask, dst.frame);
  for (std::size_t k = 0; k < out.size(); ++k) EXPECT_LE(out.pixels()[k], dst.frame.pixels()[k]);
  EXPECT_THROW((void)fuse_guidewire(src.frame, src.mask, GrayImage(10, 10, 0.5F)), DataError);
}

TEST(Elastic, ZeroAmplitudeIsIdentity) {
  const FrameSample s = SequenceRenderer(small_config()).render(0);
  ElasticParams p;
  p.amplitude = 0.0;
  const auto [im, m] = elastic_deform(s.frame, s.mask, p);
  EXPECT_EQ(im, s.frame);
  EXPECT_EQ(m, s.mask);
}

TEST(Elastic, FixedBoundaryDoesNotMove) {
  ElasticParams p;
  p.amplitude = 6.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    p.seed = seed;
    const DisplacementField f = elastic_field({97, 64}, p);
    for (int x = 0; x < 97; ++x) {
      EXPECT_EQ(f.dx(x, 0), 0.0);
      EXPECT_EQ(f.dy(x, 63), 0.0);
    }
    for (int y = 0; y < 64; ++y) {
      EXPECT_EQ(f.dx(0, y), 0.0);
      EXPECT_EQ(f.dy(96, y), 0.0);
    }
  }
  p.boundary_fixed = false;
  const DisplacementField free = elastic_field({97, 64}, p);
  double edge = 0.0;
  for (int x = 0; x < 97; ++x) edge += std::abs(free.dx(x, 0));
  EXPECT_GT(edge, 0.0);
}

TEST(Elastic, SeededAndValidated) {
  ElasticParams p;
  p.seed = 3;
  const DisplacementField a = elastic_field({50, 50}, p), b = elastic_field({50, 50}, p);
  EXPECT_TRUE(a.dx == b.dx);
  p.amplitude = -1.0;
  EXPECT_THROW((void)elastic_field({50, 50}, p), ConfigError);
  p.amplitude = 1.0;
  p.grid_spacing = 0.0;
  EXPECT_THROW((void)elastic_field({50, 50}, p), ConfigError);
}

TEST(Elastic, WireStaysConnectedAtHalfSpacing) {
  SynthConfig c;
  c.n_frames = 1;
  const FrameSample s = SequenceRenderer(c).render(0);
  ElasticParams p;
  p.grid_spacing = 32.0;
  p.amplitude = 16.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    p.seed = seed;
    const auto [im, m] = elastic_deform(s.frame, s.mask, p);
    Field<int> labels;
    EXPECT_EQ(label_components(m, labels), 1) << "seed " << seed;
  }
}

TEST(Photometric, Examples) {
  const GrayImage flat(4, 4, 0.5F);
  const GrayImage brighter = photometric_perturb(flat, 1.2, 1.0);
  for (float v : brighter.pixels()) EXPECT_NEAR(v, 0.6F, 1e-6);
  const GrayImage two(2, 1, std::vector<float>{0.3F, 0.7F});
  const GrayImage out = photometric_perturb(two, 1.0, 0.8);
  EXPECT_NEAR(out(1, 0), 0.66F, 1e-6);
  EXPECT_NEAR(out(0, 0), 0.34F, 1e-6);
  EXPECT_EQ(photometric_perturb(two, 1.0, 1.0), two);
  EXPECT_EQ(photometric_perturb(GrayImage(2, 2, 0.9F), 1.4, 1.0)(0, 0), 1.0F);
  EXPECT_THROW((void)photometric_perturb(two, 0.0, 1.0), ConfigError);
  EXPECT_THROW((void)photometric_perturb(two, 1.0, -1.0), ConfigError);
}

TEST(RenderLine, GeometryAndSeeds) {
  LineSpec spec;
  spec.noise_std = 0.0;
  const LineImage l = render_line(spec);
  EXPECT_EQ(l.image, l.clean);
  EXPECT_EQ(l.centerline(50, 112), 1);
  EXPECT_EQ(l.centerline(50, 113), 0);
  EXPECT_NEAR(l.clean(50, 112), 0.3F, 1e-6);
  spec.noise_std = 0.02;
  spec.seed = 1;
  EXPECT_NE(render_line(spec).image, render_line(LineSpec{}).image);
}

}  // namespace
}  // namespace gwtrack

#include <gtest/gtest.h>

#include "gwtrack/errors.hpp"
#include "gwtrack/eval.hpp"
#include "gwtrack/mock_detector.hpp"
#include "gwtrack/pipeline.hpp"
#include "gwtrack/synth.hpp"

namespace gwtrack {
namespace {

PipelineConfig small_config(int frames) {
  PipelineConfig c;
  c.synth.frame_dims = {256, 256};
  c.synth.n_frames = frames;
  return c;
}

struct Scenario {
  SynthSequence seq;
  std::vector<std::vector<Detection>> detections;
};

Scenario scenario(const PipelineConfig& c, const NoiseProfile& noise) {
  Scenario s{render_sequence(c.synth), {}};
  for (std::size_t i = 0; i < s.seq.frames.size(); ++i) {
    s.detections.push_back(mock_detect(s.seq.gt_boxes[i], c.synth.frame_dims, noise, static_cast<long>(i)));
  }
  return s;
}

TEST(Pipeline, NoBoxesMeansAnEmptyMaskAndNoSegmentation) {
  Pipeline p(small_config(1), Lane::single);
  const FrameOutput out = p.process(GrayImage(64, 48, 0.5F), {});
  EXPECT_EQ(out.mask.width(), 64);
  EXPECT_EQ(count_set(out.mask), 0U);
  EXPECT_EQ(out.timing.enhance_ms, 0.0);
  EXPECT_EQ(out.timing.segment_ms, 0.0);
  EXPECT_TRUE(out.state.confirmed.empty());
  EXPECT_THROW((void)p.process(GrayImage{}, {}), DataError);
}

TEST(Pipeline, SegmentsTheWireOnceConfirmed) {
  PipelineConfig c;
  c.synth.n_frames = 6;
  NoiseProfile exact;
  exact.true_conf_lo = exact.true_conf_hi = 1.0;
  const Scenario s = scenario(c, exact);
  const auto out = run_pipeline(c, s.seq.frames, s.detections, Lane::single);
  ASSERT_EQ(out.size(), 6U);
  EXPECT_EQ(count_set(out[0].mask), 0U);  // tentative only on the first frame
  for (std::size_t i = 1; i < out.size(); ++i) {
    EXPECT_GE(seg_scores(out[i].mask, s.seq.gt_masks[i]).dice, 0.8) << "frame " << i;
  }
}

TEST(Pipeline, OutputsDependOnlyOnThePast) {
  const PipelineConfig c = small_config(8);
  NoiseProfile noise;
  noise.jitter_px = 2.0;
  noise.spurious_rate = 0.3;
  const Scenario s = scenario(c, noise);
  const auto full = run_pipeline(c, s.seq.frames, s.detections, Lane::single);
  // feeding a truncated stream reproduces the prefix exactly
  const auto prefix = run_pipeline(c, std::span(s.seq.frames).first(5), std::span(s.detections).first(5),
                                   Lane::single);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(prefix[i].mask, full[i].mask);
    EXPECT_EQ(prefix[i].state, full[i].state);
  }
}

TEST(Pipeline, LanesAgreeAndRunsAreReproducible) {
  const PipelineConfig c = small_config(6);
  NoiseProfile noise;
  noise.spurious_rate = 1.0;
  noise.spurious_conf_lo = 0.6;
  noise.rng_seed = 4;
  const Scenario s = scenario(c, noise);
  const auto a = run_pipeline(c, s.seq.frames, s.detections, Lane::single);
  const auto b = run_pipeline(c, s.seq.frames, s.detections, Lane::parallel);
  const auto again = run_pipeline(c, s.seq.frames, s.detections, Lane::single);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mask, b[i].mask);
    EXPECT_EQ(a[i].mask, again[i].mask);
    EXPECT_EQ(a[i].state, b[i].state);
  }
}

TEST(Pipeline, CountMismatchIsADataError) {
  const PipelineConfig c = small_config(2);
  const std::vector<GrayImage> frames(2, GrayImage(32, 32, 0.5F));
  const std::vector<std::vector<Detection>> dets(1);
  EXPECT_THROW((void)run_pipeline(c, frames, dets, Lane::single), DataError);
}

TEST(Pipeline, WithoutRefinementSpuriousBoxesReachTheMask) {
  PipelineConfig c = small_config(20);
  NoiseProfile noise;
  noise.spurious_rate = 0.5;
  noise.spurious_conf_lo = 0.6;
  noise.rng_seed = 9;
  const Scenario s = scenario(c, noise);
  const auto refined = run_pipeline(c, s.seq.frames, s.detections, Lane::single);
  c.refine = false;
  const auto raw = run_pipeline(c, s.seq.frames, s.detections, Lane::single);
  std::vector<std::vector<BBox>> rb, pb;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    rb.push_back(refined[i].state.confirmed);
    pb.push_back(raw[i].state.confirmed);
    EXPECT_EQ(raw[i].state.frame_index, static_cast<long>(i));
  }
  EXPECT_LT(tally_detections(rb, s.seq.gt_masks).fp_frames, tally_detections(pb, s.seq.gt_masks).fp_frames);
}

TEST(LatencyStats, NearestRankPercentile) {
  std::vector<double> v;
  for (int i = 1; i <= 20; ++i) v.push_back(i);
  const LatencyStats s = latency_stats(v);
  EXPECT_DOUBLE_EQ(s.mean_ms, 10.5);
  EXPECT_DOUBLE_EQ(s.median_ms, 10.5);
  EXPECT_DOUBLE_EQ(s.p95_ms, 19.0);
  EXPECT_EQ(latency_stats({}).p95_ms, 0.0);
  EXPECT_EQ(latency_stats({3.0}).p95_ms, 3.0);
}

TEST(Bench, NeedsAHundredFrames) {
  EXPECT_THROW((void)bench(PipelineConfig{}, 99), ConfigError);
  EXPECT_THROW((void)bench(PipelineConfig{}, 0, true), ConfigError);
}

TEST(Bench, StagesAccountForTheFrameTimeAndLanesMatch) {
  const BenchReport r = bench(PipelineConfig{}, 100);
  EXPECT_EQ(r.frames, 100);
  EXPECT_EQ(r.single.mask_digest, r.parallel.mask_digest);
  EXPECT_GT(r.single.mask_pixels, 0U);
  const double overhead = (r.single.total.mean_ms - r.single.stage_mean_sum_ms) / r.single.total.mean_ms;
  EXPECT_LT(overhead, 0.05);
  const std::string text = format_bench_report(r);
  EXPECT_EQ(text.rfind("lane,stage,mean_ms,median_ms,p95_ms\n", 0), 0U);
  EXPECT_NE(text.find("single,enhance,"), std::string::npos);
  EXPECT_NE(text.find("effective_fps="), std::string::npos);
}

TEST(Bench, MoreScalesCostMoreEnhancementTime) {
  PipelineConfig two = small_config(20);
  two.hessian.scales.sigmas = {1.0, 2.0};
  PipelineConfig four = two;
  four.hessian.scales.sigmas = {1.0, 1.5, 2.0, 3.0};
  const BenchReport a = bench(two, 20, true), b = bench(four, 20, true);
  EXPECT_GT(b.single.enhance.mean_ms, a.single.enhance.mean_ms);
}

}  // namespace
}  // namespace gwtrack

#include <benchmark/benchmark.h>

#include "gwtrack/hessian.hpp"
#include "gwtrack/mock_detector.hpp"
#include "gwtrack/pipeline.hpp"
#include "gwtrack/segmenter.hpp"
#include "gwtrack/synth.hpp"
#include "gwtrack/tracker.hpp"

namespace {

using namespace gwtrack;

GrayImage crop_sized_line() {
  LineSpec spec;
  spec.angle_deg = 30.0;
  return render_line(spec).image;
}

// Enhancement cost on a 224x224 crop against the number of scales.
void BM_EnhancementMap(benchmark::State& state) {
  const GrayImage crop = crop_sized_line();
  HessianConfig cfg;
  const std::vector<double> all{1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
  cfg.scales.sigmas.assign(all.begin(), all.begin() + state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(enhancement_map(crop, cfg));
  state.counters["sigmas"] = static_cast<double>(state.range(0));
}
BENCHMARK(BM_EnhancementMap)->DenseRange(1, 6)->Unit(benchmark::kMillisecond);

void BM_EnhancementMapParallelScales(benchmark::State& state) {
  const GrayImage crop = crop_sized_line();
  HessianConfig cfg;
  cfg.parallel_scales = true;
  for (auto _ : state) benchmark::DoNotOptimize(enhancement_map(crop, cfg));
}
BENCHMARK(BM_EnhancementMapParallelScales)->Unit(benchmark::kMillisecond);

void BM_GaussianSmooth(benchmark::State& state) {
  const GrayImage crop = crop_sized_line();
  const double sigma = static_cast<double>(state.range(0)) / 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_smooth(crop, sigma));
}
BENCHMARK(BM_GaussianSmooth)->Arg(2)->Arg(3)->Arg(4)->Arg(6)->Unit(benchmark::kMicrosecond);

void BM_SegmentResponse(benchmark::State& state) {
  const ScalarField response = enhancement_map(crop_sized_line());
  for (auto _ : state) benchmark::DoNotOptimize(segment_response(response));
}
BENCHMARK(BM_SegmentResponse)->Unit(benchmark::kMicrosecond);

// One refinement step with a given number of noisy detections per frame.
void BM_RefineStep(benchmark::State& state) {
  NoiseProfile noise;
  noise.jitter_px = 2.0;
  noise.spurious_rate = 1.0;
  const BBox gt{150, 120, 300, 340};
  std::vector<Detection> dets = mock_detect(gt, {512, 512}, noise, 0);
  for (long f = 1; static_cast<long>(dets.size()) < state.range(0); ++f) {
    const auto more = mock_detect(gt, {512, 512}, noise, f);
    dets.insert(dets.end(), more.begin(), more.end());
  }
  dets.resize(static_cast<std::size_t>(state.range(0)));
  const TrackerState prev = refine_step(refine_step({}, dets), dets);
  for (auto _ : state) benchmark::DoNotOptimize(refine_step(prev, dets));
}
BENCHMARK(BM_RefineStep)->Arg(1)->Arg(4)->Arg(16)->Arg(64);

// Whole pipeline frame on the default 512x512 synthetic sequence.
void BM_PipelineFrame(benchmark::State& state) {
  PipelineConfig cfg;
  cfg.synth.n_frames = 32;
  const SynthSequence seq = render_sequence(cfg.synth);
  Pipeline pipeline(cfg, state.range(0) == 0 ? Lane::single : Lane::parallel);
  std::size_t i = 0;
  for (auto _ : state) {
    const std::vector<Detection> dets{{seq.gt_boxes[i], 1.0}};
    benchmark::DoNotOptimize(pipeline.process(seq.frames[i], dets));
    i = (i + 1) % seq.frames.size();
  }
  state.SetLabel(state.range(0) == 0 ? "single" : "parallel");
}
BENCHMARK(BM_PipelineFrame)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RenderFrame(benchmark::State& state) {
  const SequenceRenderer renderer(SynthConfig{});
  int i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(renderer.render(i++));
}
BENCHMARK(BM_RenderFrame)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

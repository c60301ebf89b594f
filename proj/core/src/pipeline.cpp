#include "gwtrack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "gwtrack/errors.hpp"
#include "gwtrack/segmenter.hpp"
#include "gwtrack/synth.hpp"

namespace gwtrack {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config, Lane lane)
    : config_(std::move(config)), lane_(lane), tracker_(config_.tracker) {
  config_.validate();
  if (lane_ == Lane::parallel) config_.hessian.parallel_scales = true;
}

BinaryMask Pipeline::segment_box(const GrayImage& frame, const BBox& box, StageTiming* timing) const {
  const Dims dims{frame.width(), frame.height()};

  auto t = Clock::now();
  const CropWindow window = crop_window(dims, box, config_.crop_size);
  const GrayImage patch = crop(frame, window);
  if (timing != nullptr) timing->crop_ms += ms_since(t);

  t = Clock::now();
  const ScalarField response = enhancement_map(patch, config_.hessian);
  if (timing != nullptr) timing->enhance_ms += ms_since(t);

  t = Clock::now();
  const BinaryMask local = segment_response(response, config_.segmenter);
  if (timing != nullptr) timing->segment_ms += ms_since(t);

  t = Clock::now();
  BinaryMask pasted = paste_mask(local, box, dims);
  if (timing != nullptr) timing->paste_ms += ms_since(t);
  return pasted;
}

FrameOutput Pipeline::process(const GrayImage& frame, std::span<const Detection> detections) {
  if (frame.empty()) throw DataError("pipeline: empty frame");
  const auto start = Clock::now();
  FrameOutput out;

  auto t = Clock::now();
  if (config_.refine) {
    out.state = tracker_.update(detections);
  } else {
    out.state.confirmed = passthrough_boxes(detections, config_.tracker);
    out.state.frame_index = tracker_.state().frame_index + 1;
    tracker_.update({});  // keeps the frame counter moving
  }
  out.timing.track_ms = ms_since(t);

  out.mask = BinaryMask(frame.width(), frame.height(), 0);
  const auto& boxes = out.state.confirmed;
  if (lane_ == Lane::parallel && boxes.size() > 1) {
    std::vector<StageTiming> timings(boxes.size());
    std::vector<std::future<BinaryMask>> jobs;
    jobs.reserve(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, [this, &frame, &boxes, &timings, i] {
        return segment_box(frame, boxes[i], &timings[i]);
      }));
    }
    // merge in box order so the union is independent of completion order
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      merge_into(out.mask, jobs[i].get());
      out.timing.crop_ms += timings[i].crop_ms;
      out.timing.enhance_ms += timings[i].enhance_ms;
      out.timing.segment_ms += timings[i].segment_ms;
      out.timing.paste_ms += timings[i].paste_ms;
    }
  } else {
    for (const BBox& box : boxes) merge_into(out.mask, segment_box(frame, box, &out.timing));
  }
  out.timing.total_ms = ms_since(start);
  return out;
}

std::vector<FrameOutput> run_pipeline(const PipelineConfig& config, std::span<const GrayImage> frames,
                                      std::span<const std::vector<Detection>> detections, Lane lane) {
  if (frames.size() != detections.size()) {
    throw DataError("pipeline: " + std::to_string(frames.size()) + " frames but " +
                    std::to_string(detections.size()) + " detection lists");
  }
  Pipeline pipeline(config, lane);
  std::vector<FrameOutput> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) out.push_back(pipeline.process(frames[i], detections[i]));
  return out;
}

LatencyStats latency_stats(std::vector<double> samples) {
  LatencyStats s;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  s.mean_ms = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  const std::size_t n = samples.size();
  s.median_ms = n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  // nearest-rank percentile
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95_ms = samples[std::clamp<std::size_t>(rank, 1, n) - 1];
  return s;
}

std::uint64_t mask_digest(const BinaryMask& mask, std::uint64_t h) {
  for (std::uint8_t v : mask.pixels()) {
    h ^= v;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

LaneReport time_lane(const PipelineConfig& config, Lane lane, const std::vector<GrayImage>& frames,
                     const std::vector<std::vector<Detection>>& detections) {
  Pipeline pipeline(config, lane);
  std::vector<double> track, crop_t, enh, seg, paste, total;
  std::uint64_t digest = 0xcbf29ce484222325ULL;
  std::size_t pixels = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameOutput out = pipeline.process(frames[i], detections[i]);
    track.push_back(out.timing.track_ms);
    crop_t.push_back(out.timing.crop_ms);
    enh.push_back(out.timing.enhance_ms);
    seg.push_back(out.timing.segment_ms);
    paste.push_back(out.timing.paste_ms);
    total.push_back(out.timing.total_ms);
    digest = mask_digest(out.mask, digest);
    pixels += count_set(out.mask);
  }
  LaneReport r;
  r.mask_digest = digest;
  r.mask_pixels = pixels;
  r.track = latency_stats(track);
  r.crop = latency_stats(crop_t);
  r.enhance = latency_stats(enh);
  r.segment = latency_stats(seg);
  r.paste = latency_stats(paste);
  r.total = latency_stats(total);
  r.stage_mean_sum_ms = r.track.mean_ms + r.crop.mean_ms + r.enhance.mean_ms + r.segment.mean_ms + r.paste.mean_ms;
  r.effective_fps = r.total.mean_ms > 0.0 ? 1000.0 / r.total.mean_ms : 0.0;
  return r;
}

}  // namespace

BenchReport bench(const PipelineConfig& config, int n_frames, bool allow_short) {
  if (n_frames <= 0 || (n_frames < 100 && !allow_short)) {
    throw ConfigError("bench: at least 100 frames are required");
  }
  config.validate();
  SynthConfig synth = config.synth;
  synth.n_frames = n_frames;
  const SequenceRenderer renderer(synth);

  // everything is rendered up front so the timed loop never touches synthesis or disk
  std::vector<GrayImage> frames;
  std::vector<std::vector<Detection>> detections;
  frames.reserve(static_cast<std::size_t>(n_frames));
  for (int i = 0; i < n_frames; ++i) {
    FrameSample s = renderer.render(i);
    frames.push_back(std::move(s.frame));
    detections.push_back({Detection{s.gt_box, 1.0}});
  }

  BenchReport report;
  report.frames = n_frames;
  report.sigmas = static_cast<int>(config.hessian.scales.sigmas.size());
  report.frame_rate_target = config.frame_rate_target;
  report.single = time_lane(config, Lane::single, frames, detections);
  report.parallel = time_lane(config, Lane::parallel, frames, detections);
  return report;
}

std::string format_bench_report(const BenchReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "lane,stage,mean_ms,median_ms,p95_ms\n";
  const auto lane = [&](const char* name, const LaneReport& l) {
    const std::pair<const char*, const LatencyStats*> rows[] = {
        {"track", &l.track},     {"crop", &l.crop},   {"enhance", &l.enhance},
        {"segment", &l.segment}, {"paste", &l.paste}, {"total", &l.total}};
    for (const auto& [stage, s] : rows) {
      out << name << ',' << stage << ',' << s->mean_ms << ',' << s->median_ms << ',' << s->p95_ms << '\n';
    }
  };
  lane("single", r.single);
  lane("parallel", r.parallel);
  out << "# frames=" << r.frames << " sigmas=" << r.sigmas << '\n';
  for (const auto& [name, l] : {std::pair{"single", &r.single}, std::pair{"parallel", &r.parallel}}) {
    const double overhead =
        l->total.mean_ms > 0.0 ? (l->total.mean_ms - l->stage_mean_sum_ms) / l->total.mean_ms : 0.0;
    out << "# " << name << ": effective_fps=" << std::setprecision(1) << l->effective_fps
        << " target_fps=" << r.frame_rate_target << " meets_target=" << (l->effective_fps >= r.frame_rate_target ? "yes" : "no")
        << " unaccounted_overhead=" << std::setprecision(2) << 100.0 * overhead << "%\n"
        << std::setprecision(3);
  }
  return out.str();
}

}  // namespace gwtrack

// gwtrack command line: synthetic data, detection streams, tracking,
// enhancement, segmentation, evaluation and benchmarking.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 data error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gwtrack/config.hpp"
#include "gwtrack/errors.hpp"
#include "gwtrack/eval.hpp"
#include "gwtrack/io.hpp"
#include "gwtrack/mock_detector.hpp"
#include "gwtrack/pipeline.hpp"
#include "gwtrack/rng.hpp"
#include "gwtrack/segmenter.hpp"
#include "gwtrack/synth.hpp"

namespace fs = std::filesystem;
using namespace gwtrack;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr std::uint64_t kStreamElastic = 0xe1a5;

std::string numbered(const char* stem, long index, const std::string& ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04ld%s", stem, index, ext.c_str());
  return buf;
}

PipelineConfig config_from(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_config(path);
}

io::BitDepth bit_depth(int bits) {
  if (bits == 8) return io::BitDepth::u8;
  if (bits == 16) return io::BitDepth::u16;
  throw ConfigError("bit depth must be 8 or 16");
}

std::string extension_for(const std::string& format) {
  if (format == "png") return ".png";
  if (format == "pgm") return ".pgm";
  throw ConfigError("image format must be png or pgm");
}

BBox parse_box_arg(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("--box: cannot parse \"" + text + "\"");
    }
  }
  if (v.size() != 4) throw ConfigError("--box expects x_min,y_min,x_max,y_max");
  BBox b{v[0], v[1], v[2], v[3]};
  if (!b.valid()) throw ConfigError("--box: x_max and y_max must exceed x_min and y_min");
  return b;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// Detections per manifest frame, keyed by the stream's "frame" field.
std::vector<std::vector<Detection>> align_detections(const io::Manifest& manifest,
                                                     const std::vector<io::DetectionFrame>& stream) {
  std::map<long, std::size_t> slot;
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) slot[manifest.frames[i].index] = i;
  std::vector<std::vector<Detection>> out(manifest.frames.size());
  for (const auto& f : stream) {
    const auto it = slot.find(f.frame);
    if (it == slot.end()) throw DataError("detections reference frame " + std::to_string(f.frame) + " not in the manifest");
    out[it->second] = f.detections;
  }
  return out;
}

std::vector<std::vector<Detection>> mock_stream(const io::Manifest& manifest, const NoiseProfile& profile) {
  std::vector<std::vector<Detection>> out;
  const Dims dims{manifest.width, manifest.height};
  for (const auto& f : manifest.frames) {
    out.push_back(f.gt_box ? mock_detect(*f.gt_box, dims, profile, f.index) : std::vector<Detection>{});
  }
  return out;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string config, out, format = "png";
  std::optional<int> frames;
  std::optional<std::uint64_t> seed;
  int bits = 16;
};

int cmd_synth(const SynthArgs& a) {
  PipelineConfig cfg = config_from(a.config);
  if (a.frames) cfg.synth.n_frames = *a.frames;
  if (a.seed) cfg.synth.rng_seed = *a.seed;
  cfg.validate();
  const std::string ext = extension_for(a.format);
  const io::BitDepth depth = bit_depth(a.bits);

  const SequenceRenderer renderer(cfg.synth);
  io::Manifest manifest;
  manifest.seed = cfg.synth.rng_seed;
  manifest.width = cfg.synth.frame_dims.width;
  manifest.height = cfg.synth.frame_dims.height;
  manifest.config_json = dump_config(cfg, -1);
  const fs::path root(a.out);
  for (int i = 0; i < cfg.synth.n_frames; ++i) {
    const FrameSample s = renderer.render(i);
    io::ManifestFrame f;
    f.index = i;
    f.image = "frames/" + numbered("frame", i, ext);
    f.mask = "masks/" + numbered("mask", i, ext);
    f.gt_box = s.gt_box;
    io::write_image(root / f.image, s.frame, depth);
    io::write_mask(root / f.mask, s.mask);
    manifest.frames.push_back(std::move(f));
  }
  io::write_manifest(root / "manifest.json", manifest);
  std::cout << "wrote " << cfg.synth.n_frames << " frames to " << root.string() << '\n';
  return 0;
}

struct DetectArgs {
  std::string config, manifest, out;
  std::optional<std::uint64_t> seed;
};

int cmd_detect_mock(const DetectArgs& a) {
  PipelineConfig cfg = config_from(a.config);
  if (a.seed) cfg.detector.rng_seed = *a.seed;
  cfg.validate();
  const io::Manifest manifest = io::read_manifest(a.manifest);
  const auto dets = mock_stream(manifest, cfg.detector);
  std::vector<io::DetectionFrame> frames;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    frames.push_back({manifest.frames[i].index, dets[i], manifest.temporal_stacking});
  }
  auto out = open_out(a.out);
  io::write_detections(out, frames);
  return 0;
}

struct TrackArgs {
  std::string config, detections, out;
  bool no_refine = false;
};

int cmd_track(const TrackArgs& a) {
  const PipelineConfig cfg = config_from(a.config);
  const auto stream = io::read_detections(fs::path(a.detections));
  auto out = open_out(a.out);
  Tracker tracker(cfg.tracker);
  const bool refine = cfg.refine && !a.no_refine;
  for (const auto& f : stream) {
    TrackerState state = tracker.update(f.detections);
    if (!refine) state = {passthrough_boxes(f.detections, cfg.tracker), {}, state.frame_index};
    state.frame_index = f.frame;
    out << io::format_track_line(state) << '\n';
  }
  return 0;
}

struct EnhanceArgs {
  std::string config, input, out, maps_dir;
  int bits = 16;
};

int cmd_enhance(const EnhanceArgs& a) {
  const PipelineConfig cfg = config_from(a.config);
  const GrayImage image = io::read_image(a.input);
  const EnhanceResult r = enhance(image, cfg.hessian);
  io::write_image(a.out, r.fused, bit_depth(a.bits));
  if (!a.maps_dir.empty()) {
    const fs::path dir(a.maps_dir);
    for (std::size_t s = 0; s < r.maps.sigmas.size(); ++s) {
      io::write_normalized(dir / numbered("lambda1_scale", static_cast<long>(s), ".png"), r.maps.lambda1[s]);
      io::write_normalized(dir / numbered("lambda2_scale", static_cast<long>(s), ".png"), r.maps.lambda2[s]);
    }
    io::write_normalized(dir / "enhancement.png", r.maps.enhancement);
  }
  return 0;
}

struct SegmentArgs {
  std::string config, input, out, box, overlay;
};

int cmd_segment(const SegmentArgs& a) {
  const PipelineConfig cfg = config_from(a.config);
  const GrayImage image = io::read_image(a.input);
  BinaryMask mask;
  if (a.box.empty()) {
    mask = segment_crop(image, cfg.segmenter, cfg.hessian);
  } else {
    const Pipeline pipeline(cfg);
    mask = pipeline.segment_box(image, parse_box_arg(a.box));
  }
  io::write_mask(a.out, mask);
  if (!a.overlay.empty()) io::write_image(a.overlay, io::overlay_contour(image, mask), io::BitDepth::u8);
  return 0;
}

struct RunArgs {
  std::string config, manifest, detections, out, lane = "single";
  bool no_refine = false, timing = false, overlay = false;
};

int cmd_run(const RunArgs& a) {
  PipelineConfig cfg = config_from(a.config);
  if (a.no_refine) cfg.refine = false;
  if (a.lane != "single" && a.lane != "parallel") throw ConfigError("--lane must be single or parallel");
  const io::Manifest manifest = io::read_manifest(a.manifest);
  const auto dets = a.detections.empty() ? mock_stream(manifest, cfg.detector)
                                         : align_detections(manifest, io::read_detections(fs::path(a.detections)));

  const fs::path root(a.out);
  Pipeline pipeline(cfg, a.lane == "parallel" ? Lane::parallel : Lane::single);
  auto tracks = open_out(root / "tracks.jsonl");
  std::ostringstream timing;
  timing << "frame,track_ms,crop_ms,enhance_ms,segment_ms,paste_ms,total_ms\n";

  // frame decode runs one frame ahead of compute
  const auto load = [&](std::size_t i) { return io::read_image(manifest.image_path(i)); };
  std::future<GrayImage> next;
  if (!manifest.frames.empty()) next = std::async(std::launch::async, load, 0);
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    const GrayImage frame = next.get();
    if (frame.width() != manifest.width || frame.height() != manifest.height) {
      throw DataError(manifest.image_path(i).string() + ": size differs from the manifest");
    }
    if (i + 1 < manifest.frames.size()) next = std::async(std::launch::async, load, i + 1);

    FrameOutput out = pipeline.process(frame, dets[i]);
    const long index = manifest.frames[i].index;
    out.state.frame_index = index;
    tracks << io::format_track_line(out.state) << '\n';
    io::write_mask(root / "masks" / numbered("mask", index, ".png"), out.mask);
    if (a.overlay) {
      io::write_image(root / "overlays" / numbered("overlay", index, ".png"), io::overlay_contour(frame, out.mask),
                      io::BitDepth::u8);
    }
    const StageTiming& t = out.timing;
    timing << index << ',' << t.track_ms << ',' << t.crop_ms << ',' << t.enhance_ms << ',' << t.segment_ms << ','
           << t.paste_ms << ',' << t.total_ms << '\n';
  }
  if (a.timing) io::write_text(root / "timing.csv", timing.str());
  return 0;
}

struct EvalArgs {
  std::string config, manifest, pred, tracks, out;
  bool sweep = false;
};

int cmd_eval(const EvalArgs& a) {
  const PipelineConfig cfg = config_from(a.config);
  const io::Manifest manifest = io::read_manifest(a.manifest);
  const fs::path pred_root(a.pred), out_root(a.out);

  std::vector<BinaryMask> gt;
  std::vector<SegScores> scores;
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    if (manifest.frames[i].mask.empty()) throw DataError("manifest frame " + std::to_string(i) + " has no mask");
    gt.push_back(io::read_mask(manifest.mask_path(i)));
    const BinaryMask pred = io::read_mask(pred_root / "masks" / numbered("mask", manifest.frames[i].index, ".png"));
    scores.push_back(seg_scores(pred, gt.back()));
  }
  const PooledScores all = pool(scores);
  const DifficultSplit split = difficult_split(scores, cfg.eval.difficult_threshold);
  {
    auto os = open_out(out_root / "per_frame.csv");
    write_per_frame_csv(os, scores);
  }
  {
    auto os = open_out(out_root / "summary.csv");
    write_summary_csv(os, all, split);
  }
  if (!a.tracks.empty()) {
    const auto states = io::read_tracks(a.tracks);
    if (states.size() != gt.size()) throw DataError("tracks and manifest differ in frame count");
    auto os = open_out(out_root / "detection_tally.csv");
    write_tally_csv(os, tally_detections(states, gt));
  }
  if (a.sweep) {
    std::vector<GrayImage> frames;
    std::vector<BBox> boxes;
    for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
      if (!manifest.frames[i].gt_box) throw DataError("sweep needs a gt_box for every frame");
      frames.push_back(io::read_image(manifest.image_path(i)));
      boxes.push_back(*manifest.frames[i].gt_box);
    }
    const Pipeline pipeline(cfg);
    const FramePipeline hessian = [&](const GrayImage& f, std::size_t i) { return pipeline.segment_box(f, boxes[i]); };
    const ThresholdBaseline base = ThresholdBaseline::calibrate(frames, gt, boxes);
    const FramePipeline plain = [&](const GrayImage& f, std::size_t i) { return base.segment(f, boxes[i]); };
    auto hs = open_out(out_root / "sweep_hessian.csv");
    write_sweep_csv(hs, robustness_sweep(hessian, frames, gt, cfg.eval.brightness_grid, cfg.eval.contrast_grid));
    auto bs = open_out(out_root / "sweep_threshold.csv");
    write_sweep_csv(bs, robustness_sweep(plain, frames, gt, cfg.eval.brightness_grid, cfg.eval.contrast_grid));
  }
  std::cout << "frames " << all.frames << " dice " << all.dice << " sensitivity " << all.sensitivity << " fdr "
            << all.fdr << " hd " << all.hd << '\n';
  return 0;
}

struct PerturbArgs {
  std::string manifest, out;
  double brightness = 1.0, contrast = 1.0, amplitude = 0.0, spacing = 32.0;
  std::uint64_t elastic_seed = 0;
  bool free_boundary = false;
  int bits = 16;
};

int cmd_perturb(const PerturbArgs& a) {
  if (!(a.amplitude >= 0.0)) throw ConfigError("--elastic-amplitude must be non-negative");
  if (!(a.spacing > 0.0)) throw ConfigError("--elastic-spacing must be positive");
  const io::Manifest in = io::read_manifest(a.manifest);
  io::Manifest out = in;
  out.frames.clear();
  const fs::path root(a.out);
  for (std::size_t i = 0; i < in.frames.size(); ++i) {
    GrayImage image = io::read_image(in.image_path(i));
    BinaryMask mask = in.frames[i].mask.empty() ? BinaryMask(image.width(), image.height(), 0)
                                                : io::read_mask(in.mask_path(i));
    if (a.amplitude > 0.0) {
      const ElasticParams params{a.amplitude, a.spacing, !a.free_boundary,
                                 derive_seed(a.elastic_seed, kStreamElastic, static_cast<std::uint64_t>(in.frames[i].index))};
      std::tie(image, mask) = elastic_deform(image, mask, params);
    }
    image = photometric_perturb(image, a.brightness, a.contrast);
    io::ManifestFrame f = in.frames[i];
    const std::string ext = fs::path(f.image).extension().string();
    f.image = "frames/" + numbered("frame", f.index, ext);
    io::write_image(root / f.image, image, bit_depth(a.bits));
    if (!in.frames[i].mask.empty()) {
      f.mask = "masks/" + numbered("mask", f.index, ".png");
      io::write_mask(root / f.mask, mask);
      f.gt_box = tight_box(mask);
    }
    out.frames.push_back(std::move(f));
  }
  io::write_manifest(root / "manifest.json", out);
  return 0;
}

struct BenchArgs {
  std::string config, out;
  int frames = 100;
};

int cmd_bench(const BenchArgs& a) {
  const PipelineConfig cfg = config_from(a.config);
  const BenchReport r = bench(cfg, a.frames);
  const std::string report = format_bench_report(r);
  std::cout << report;
  if (!a.out.empty()) {
    const fs::path root(a.out);
    io::write_text(root / "bench_timing.csv", report);
    std::ostringstream run;
    run << "frames," << r.frames << "\nsigmas," << r.sigmas << "\nwidth," << cfg.synth.frame_dims.width
        << "\nheight," << cfg.synth.frame_dims.height << "\nsingle_mask_digest," << r.single.mask_digest
        << "\nparallel_mask_digest," << r.parallel.mask_digest << "\nmask_pixels," << r.single.mask_pixels << '\n';
    io::write_text(root / "bench_run.csv", run.str());
  }
  if (r.single.mask_digest != r.parallel.mask_digest) throw DataError("bench: lanes produced different masks");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gwtrack: guidewire detection refinement, enhancement and segmentation"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "render a synthetic fluoroscopy sequence with masks and manifest");
  s->add_option("--config", synth.config, "config file (JSON)");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--frames", synth.frames, "override synth.n_frames");
  s->add_option("--seed", synth.seed, "override synth.rng_seed");
  s->add_option("--format", synth.format, "png or pgm");
  s->add_option("--bit-depth", synth.bits, "8 or 16");

  DetectArgs detect;
  auto* d = app.add_subcommand("detect-mock", "noisy detections around the manifest's ground-truth boxes");
  d->add_option("--config", detect.config, "config file (JSON)");
  d->add_option("--manifest", detect.manifest, "dataset manifest")->required();
  d->add_option("--out", detect.out, "detection stream (JSON lines)")->required();
  d->add_option("--seed", detect.seed, "override mock_detector.rng_seed");

  TrackArgs track;
  auto* t = app.add_subcommand("track", "refine a detection stream into confirmed/tentative boxes");
  t->add_option("--config", track.config, "config file (JSON)");
  t->add_option("--detections", track.detections, "detection stream (JSON lines)")->required();
  t->add_option("--out", track.out, "track stream (JSON lines)")->required();
  t->add_flag("--no-refine", track.no_refine, "emit raw high-confidence boxes instead");

  EnhanceArgs enh;
  auto* e = app.add_subcommand("enhance", "Hessian enhancement and fusion of one image");
  e->add_option("--config", enh.config, "config file (JSON)");
  e->add_option("--input", enh.input, "input image")->required();
  e->add_option("--out", enh.out, "fused image")->required();
  e->add_option("--maps-dir", enh.maps_dir, "also write per-scale eigenvalue maps and the enhancement map");
  e->add_option("--bit-depth", enh.bits, "8 or 16");

  SegmentArgs seg;
  auto* g = app.add_subcommand("segment", "segment one image, or one box of it");
  g->add_option("--config", seg.config, "config file (JSON)");
  g->add_option("--input", seg.input, "input image")->required();
  g->add_option("--out", seg.out, "mask image")->required();
  g->add_option("--box", seg.box, "x_min,y_min,x_max,y_max; crop, segment and paste back");
  g->add_option("--overlay", seg.overlay, "also write the input with the mask contour");

  RunArgs run;
  auto* r = app.add_subcommand("run", "full pipeline over a manifest");
  r->add_option("--config", run.config, "config file (JSON)");
  r->add_option("--manifest", run.manifest, "dataset manifest")->required();
  r->add_option("--detections", run.detections, "detection stream; mock detections when omitted");
  r->add_option("--out", run.out, "output directory")->required();
  r->add_option("--lane", run.lane, "single or parallel");
  r->add_flag("--no-refine", run.no_refine, "ablation: segment raw high-confidence boxes");
  r->add_flag("--timing", run.timing, "write per-frame stage timings");
  r->add_flag("--overlay", run.overlay, "write contour overlays");

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "score predicted masks (and tracks) against the manifest");
  v->add_option("--config", ev.config, "config file (JSON)");
  v->add_option("--manifest", ev.manifest, "dataset manifest")->required();
  v->add_option("--pred", ev.pred, "prediction directory written by run")->required();
  v->add_option("--tracks", ev.tracks, "track stream for detection counting");
  v->add_option("--out", ev.out, "output directory")->required();
  v->add_flag("--sweep", ev.sweep, "brightness x contrast sweep of the Hessian pipeline and the threshold baseline");

  PerturbArgs pert;
  auto* p = app.add_subcommand("perturb", "photometric and elastic augmentation of a dataset");
  p->add_option("--manifest", pert.manifest, "dataset manifest")->required();
  p->add_option("--out", pert.out, "output directory")->required();
  p->add_option("--brightness", pert.brightness, "brightness ratio");
  p->add_option("--contrast", pert.contrast, "contrast ratio");
  p->add_option("--elastic-amplitude", pert.amplitude, "largest grid-node offset in pixels (0 disables)");
  p->add_option("--elastic-spacing", pert.spacing, "control grid spacing in pixels");
  p->add_option("--elastic-seed", pert.elastic_seed, "seed of the deformation fields");
  p->add_flag("--free-boundary", pert.free_boundary, "let the border move");
  p->add_option("--bit-depth", pert.bits, "8 or 16");

  BenchArgs bn;
  auto* b = app.add_subcommand("bench", "latency of the pipeline on preloaded synthetic frames");
  b->add_option("--config", bn.config, "config file (JSON)");
  b->add_option("--frames", bn.frames, "number of frames (>= 100)");
  b->add_option("--out", bn.out, "directory for the report files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : kExitConfig;
  }

  try {
    if (s->parsed()) return cmd_synth(synth);
    if (d->parsed()) return cmd_detect_mock(detect);
    if (t->parsed()) return cmd_track(track);
    if (e->parsed()) return cmd_enhance(enh);
    if (g->parsed()) return cmd_segment(seg);
    if (r->parsed()) return cmd_run(run);
    if (v->parsed()) return cmd_eval(ev);
    if (p->parsed()) return cmd_perturb(pert);
    if (b->parsed()) return cmd_bench(bn);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitConfig;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}

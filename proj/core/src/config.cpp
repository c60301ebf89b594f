#include "gwtrack/config.hpp"

#include <nlohmann/json.hpp>
#include <functional>
#include <set>

#include "gwtrack/errors.hpp"
#include "gwtrack/io.hpp"

namespace gwtrack {

using ordered_json = nlohmann::ordered_json;

namespace {

// Reads known keys of one section and rejects the rest.
class Section {
 public:
  Section(const ordered_json& root, std::string name) : name_(std::move(name)) {
    if (!root.contains(name_)) return;
    node_ = &root.at(name_);
    if (!node_->is_object()) throw ConfigError("config: section \"" + name_ + "\" must be an object");
  }

  template <typename T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    if (node_ == nullptr || !node_->contains(key)) return;
    try {
      target = node_->at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config: " + name_ + "." + key + " has the wrong type");
    }
  }

  [[nodiscard]] const ordered_json* child(const char* key) {
    seen_.insert(key);
    if (node_ == nullptr || !node_->contains(key)) return nullptr;
    return &node_->at(key);
  }

  void finish() const {
    if (node_ == nullptr) return;
    for (const auto& [key, value] : node_->items()) {
      if (seen_.count(key) == 0) throw ConfigError("config: unknown key " + name_ + "." + key);
    }
  }

 private:
  std::string name_;
  const ordered_json* node_ = nullptr;
  std::set<std::string, std::less<>> seen_;
};

Polarity parse_polarity(const std::string& s) {
  if (s == "dark") return Polarity::dark;
  if (s == "bright") return Polarity::bright;
  throw ConfigError("config: hessian.polarity must be \"dark\" or \"bright\"");
}

void read_object(const ordered_json* node, const std::string& where,
                 const std::function<void(Section&)>& body) {
  if (node == nullptr) return;
  ordered_json wrapper;
  wrapper[where] = *node;
  Section s(wrapper, where);
  body(s);
  s.finish();
}

}  // namespace

void PipelineConfig::validate() const {
  hessian.validate();
  tracker.validate();
  segmenter.validate();
  synth.validate();
  detector.validate();
  if (crop_size <= 0) throw ConfigError("config: pipeline.crop_size must be positive");
  if (!(frame_rate_target > 0.0)) throw ConfigError("config: pipeline.frame_rate_target must be positive");
  if (!(eval.difficult_threshold > 0.0)) throw ConfigError("config: eval.difficult_threshold must be positive");
  if (eval.brightness_grid.empty() || eval.contrast_grid.empty()) {
    throw ConfigError("config: eval ratio grids must be non-empty");
  }
  for (double r : eval.brightness_grid) {
    if (!(r > 0.0)) throw ConfigError("config: eval.brightness_grid ratios must be positive");
  }
  for (double r : eval.contrast_grid) {
    if (!(r > 0.0)) throw ConfigError("config: eval.contrast_grid ratios must be positive");
  }
}

PipelineConfig parse_config(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON (") + e.what() + ")");
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> kSections{"hessian", "tracker", "segmenter", "synth",
                                               "mock_detector", "eval", "pipeline"};
  for (const auto& [key, value] : root.items()) {
    if (kSections.count(key) == 0) throw ConfigError("config: unknown section \"" + key + "\"");
  }

  PipelineConfig cfg;
  {
    Section s(root, "hessian");
    s.read("sigmas", cfg.hessian.scales.sigmas);
    s.read("tau_j", cfg.hessian.tau_j);
    s.read("alpha", cfg.hessian.alpha);
    std::string polarity = cfg.hessian.polarity == Polarity::dark ? "dark" : "bright";
    s.read("polarity", polarity);
    cfg.hessian.polarity = parse_polarity(polarity);
    s.read("parallel_scales", cfg.hessian.parallel_scales);
    s.finish();
  }
  {
    Section s(root, "tracker");
    s.read("conf_split", cfg.tracker.conf_split);
    s.read("iou_match", cfg.tracker.iou_match);
    s.read("adaptive_frac", cfg.tracker.adaptive_frac);
    s.finish();
  }
  {
    Section s(root, "segmenter");
    s.read("hi_thresh", cfg.segmenter.hi_thresh);
    s.read("lo_thresh", cfg.segmenter.lo_thresh);
    s.read("min_component_px", cfg.segmenter.min_component_px);
    s.finish();
  }
  {
    Section s(root, "synth");
    std::vector<int> dims{cfg.synth.frame_dims.width, cfg.synth.frame_dims.height};
    s.read("frame_dims", dims);
    if (dims.size() != 2) throw ConfigError("config: synth.frame_dims must be [width, height]");
    cfg.synth.frame_dims = {dims[0], dims[1]};
    s.read("n_frames", cfg.synth.n_frames);
    s.read("rng_seed", cfg.synth.rng_seed);
    read_object(s.child("wire"), "synth.wire", [&](Section& w) {
      w.read("n_control_points", cfg.synth.wire.n_control_points);
      w.read("depth", cfg.synth.wire.depth);
      w.read("width_sigma", cfg.synth.wire.width_sigma);
      w.read("motion_amplitude", cfg.synth.wire.motion_amplitude);
      w.read("radiopaque_fraction", cfg.synth.wire.radiopaque_fraction);
      w.read("length_fraction", cfg.synth.wire.length_fraction);
    });
    read_object(s.child("background"), "synth.background", [&](Section& b) {
      b.read("n_blobs", cfg.synth.background.n_blobs);
      b.read("low_freq_scale", cfg.synth.background.low_freq_scale);
      b.read("noise_std", cfg.synth.background.noise_std);
      b.read("mean_level", cfg.synth.background.mean_level);
      b.read("variation", cfg.synth.background.variation);
    });
    s.finish();
  }
  {
    Section s(root, "mock_detector");
    s.read("jitter_px", cfg.detector.jitter_px);
    s.read("drop_rate", cfg.detector.drop_rate);
    s.read("spurious_rate", cfg.detector.spurious_rate);
    std::vector<double> spurious{cfg.detector.spurious_conf_lo, cfg.detector.spurious_conf_hi};
    std::vector<double> truth{cfg.detector.true_conf_lo, cfg.detector.true_conf_hi};
    s.read("spurious_conf_range", spurious);
    s.read("true_conf_range", truth);
    if (spurious.size() != 2 || truth.size() != 2) {
      throw ConfigError("config: mock_detector confidence ranges must be [lo, hi]");
    }
    cfg.detector.spurious_conf_lo = spurious[0];
    cfg.detector.spurious_conf_hi = spurious[1];
    cfg.detector.true_conf_lo = truth[0];
    cfg.detector.true_conf_hi = truth[1];
    s.read("rng_seed", cfg.detector.rng_seed);
    s.finish();
  }
  {
    Section s(root, "eval");
    s.read("difficult_threshold", cfg.eval.difficult_threshold);
    s.read("brightness_grid", cfg.eval.brightness_grid);
    s.read("contrast_grid", cfg.eval.contrast_grid);
    s.finish();
  }
  {
    Section s(root, "pipeline");
    s.read("crop_size", cfg.crop_size);
    s.read("frame_rate_target", cfg.frame_rate_target);
    s.read("refine", cfg.refine);
    s.finish();
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(text);
}

std::string dump_config(const PipelineConfig& c, int indent) {
  ordered_json j;
  j["hessian"] = {{"sigmas", c.hessian.scales.sigmas},
                  {"tau_j", c.hessian.tau_j},
                  {"alpha", c.hessian.alpha},
                  {"polarity", c.hessian.polarity == Polarity::dark ? "dark" : "bright"},
                  {"parallel_scales", c.hessian.parallel_scales}};
  j["tracker"] = {{"conf_split", c.tracker.conf_split},
                  {"iou_match", c.tracker.iou_match},
                  {"adaptive_frac", c.tracker.adaptive_frac}};
  j["segmenter"] = {{"hi_thresh", c.segmenter.hi_thresh},
                    {"lo_thresh", c.segmenter.lo_thresh},
                    {"min_component_px", c.segmenter.min_component_px}};
  const auto& w = c.synth.wire;
  const auto& b = c.synth.background;
  j["synth"] = {{"frame_dims", {c.synth.frame_dims.width, c.synth.frame_dims.height}},
                {"n_frames", c.synth.n_frames},
                {"rng_seed", c.synth.rng_seed},
                {"wire",
                 {{"n_control_points", w.n_control_points},
                  {"depth", w.depth},
                  {"width_sigma", w.width_sigma},
                  {"motion_amplitude", w.motion_amplitude},
                  {"radiopaque_fraction", w.radiopaque_fraction},
                  {"length_fraction", w.length_fraction}}},
                {"background",
                 {{"n_blobs", b.n_blobs},
                  {"low_freq_scale", b.low_freq_scale},
                  {"noise_std", b.noise_std},
                  {"mean_level", b.mean_level},
                  {"variation", b.variation}}}};
  j["mock_detector"] = {{"jitter_px", c.detector.jitter_px},
                        {"drop_rate", c.detector.drop_rate},
                        {"spurious_rate", c.detector.spurious_rate},
                        {"spurious_conf_range", {c.detector.spurious_conf_lo, c.detector.spurious_conf_hi}},
                        {"true_conf_range", {c.detector.true_conf_lo, c.detector.true_conf_hi}},
                        {"rng_seed", c.detector.rng_seed}};
  j["eval"] = {{"difficult_threshold", c.eval.difficult_threshold},
               {"brightness_grid", c.eval.brightness_grid},
               {"contrast_grid", c.eval.contrast_grid}};
  j["pipeline"] = {{"crop_size", c.crop_size}, {"frame_rate_target", c.frame_rate_target}, {"refine", c.refine}};
  return j.dump(indent);
}

}  // namespace gwtrack

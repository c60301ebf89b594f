#include "gwtrack/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "gwtrack/errors.hpp"
#include "gwtrack/rng.hpp"

namespace gwtrack {

namespace {

// Stream identifiers for derive_seed.
constexpr std::uint64_t kStreamGeometry = 1;
constexpr std::uint64_t kStreamBackground = 2;
constexpr std::uint64_t kStreamNoise = 3;
constexpr std::uint64_t kStreamMotion = 4;
constexpr std::uint64_t kStreamElastic = 5;
constexpr std::uint64_t kStreamLine = 6;

constexpr double kMotionPeriodFrames = 48.0;
constexpr int kRingRadius = 7;  // 15x15 ring

double segment_distance_sq(double px, double py, const Point2& a, const Point2& b) noexcept {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len_sq = vx * vx + vy * vy;
  double t = 0.0;
  if (len_sq > 0.0) t = std::clamp(((px - a.x) * vx + (py - a.y) * vy) / len_sq, 0.0, 1.0);
  const double dx = px - (a.x + t * vx);
  const double dy = py - (a.y + t * vy);
  return dx * dx + dy * dy;
}

std::array<double, 4> catmull_rom_weights(double t) noexcept {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
          0.5 * (-3.0 * t3 + 4.0 * t2 + t), 0.5 * (t3 - t2)};
}

void add_gaussian_noise(GrayImage& image, double noise_std, std::uint64_t seed) {
  if (noise_std <= 0.0) return;
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, noise_std);
  for (float& v : image.pixels()) v = static_cast<float>(v + noise(rng));
}

}  // namespace

void SynthConfig::validate() const {
  if (frame_dims.width <= 0 || frame_dims.height <= 0) throw ConfigError("synth: frame_dims must be positive");
  if (n_frames < 0) throw ConfigError("synth: n_frames must be >= 0");
  if (!(wire.depth > 0.0 && wire.depth < 1.0)) throw ConfigError("synth: wire.depth must lie in (0,1)");
  if (!(wire.width_sigma > 0.0)) throw ConfigError("synth: wire.width_sigma must be > 0");
  if (!(wire.motion_amplitude >= 0.0)) throw ConfigError("synth: wire.motion_amplitude must be >= 0");
  if (wire.n_control_points < 2) throw ConfigError("synth: wire.n_control_points must be >= 2");
  if (!(wire.radiopaque_fraction > 0.0 && wire.radiopaque_fraction <= 1.0)) {
    throw ConfigError("synth: wire.radiopaque_fraction must lie in (0,1]");
  }
  if (!(wire.length_fraction > 0.0 && wire.length_fraction <= 1.0)) {
    throw ConfigError("synth: wire.length_fraction must lie in (0,1]");
  }
  if (background.n_blobs < 0) throw ConfigError("synth: background.n_blobs must be >= 0");
  if (!(background.low_freq_scale > 0.0)) throw ConfigError("synth: background.low_freq_scale must be > 0");
  if (!(background.noise_std >= 0.0)) throw ConfigError("synth: background.noise_std must be >= 0");
  if (!(background.mean_level > 0.0 && background.mean_level < 1.0)) {
    throw ConfigError("synth: background.mean_level must lie in (0,1)");
  }
  if (!(background.variation >= 0.0)) throw ConfigError("synth: background.variation must be >= 0");
}

std::vector<Point2> catmull_rom(const std::vector<Point2>& control, int samples_per_segment) {
  if (control.size() < 2) return control;
  const std::size_t n = control.size();
  auto at = [&](std::ptrdiff_t i) -> Point2 {
    if (i < 0) return {2.0 * control[0].x - control[1].x, 2.0 * control[0].y - control[1].y};
    if (i >= static_cast<std::ptrdiff_t>(n)) {
      return {2.0 * control[n - 1].x - control[n - 2].x, 2.0 * control[n - 1].y - control[n - 2].y};
    }
    return control[static_cast<std::size_t>(i)];
  };
  std::vector<Point2> out;
  out.reserve((n - 1) * static_cast<std::size_t>(samples_per_segment) + 1);
  for (std::size_t s = 0; s + 1 < n; ++s) {
    const auto i = static_cast<std::ptrdiff_t>(s);
    const Point2 p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    for (int k = 0; k < samples_per_segment; ++k) {
      const auto w = catmull_rom_weights(static_cast<double>(k) / samples_per_segment);
      out.push_back({w[0] * p0.x + w[1] * p1.x + w[2] * p2.x + w[3] * p3.x,
                     w[0] * p0.y + w[1] * p1.y + w[2] * p2.y + w[3] * p3.y});
    }
  }
  out.push_back(control.back());
  return out;
}

std::vector<Point2> polyline_tail(const std::vector<Point2>& polyline, double fraction) {
  if (polyline.size() < 2 || fraction >= 1.0) return polyline;
  std::vector<double> cumulative(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + std::hypot(polyline[i].x - polyline[i - 1].x,
                                                   polyline[i].y - polyline[i - 1].y);
  }
  const double start = (1.0 - fraction) * cumulative.back();
  std::vector<Point2> tail;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    if (cumulative[i] < start) continue;
    if (tail.empty()) {
      const double seg = cumulative[i] - cumulative[i - 1];
      const double t = seg > 0.0 ? (start - cumulative[i - 1]) / seg : 0.0;
      tail.push_back({polyline[i - 1].x + t * (polyline[i].x - polyline[i - 1].x),
                      polyline[i - 1].y + t * (polyline[i].y - polyline[i - 1].y)});
    }
    tail.push_back(polyline[i]);
  }
  return tail;
}

WireRaster rasterize_wire(Dims dims, const std::vector<Point2>& polyline, double depth,
                          double width_sigma) {
  const double inf = std::numeric_limits<double>::infinity();
  ScalarField dist_sq(dims.width, dims.height, inf);
  const double reach = 5.0 * width_sigma + 1.0;
  auto stamp = [&](const Point2& a, const Point2& b) {
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - reach)));
    const int x1 = std::min(dims.width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - reach)));
    const int y1 = std::min(dims.height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + reach)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double d = segment_distance_sq(x + 0.5, y + 0.5, a, b);
        if (d < dist_sq(x, y)) dist_sq(x, y) = d;
      }
    }
  };
  if (polyline.size() == 1) stamp(polyline[0], polyline[0]);
  for (std::size_t i = 1; i < polyline.size(); ++i) stamp(polyline[i - 1], polyline[i]);

  WireRaster raster{ScalarField(dims.width, dims.height, 0.0), BinaryMask(dims.width, dims.height, 0)};
  const double inv_two_var = 1.0 / (2.0 * width_sigma * width_sigma);
  const auto d2 = dist_sq.pixels();
  auto deficit = raster.deficit.pixels();
  auto mask = raster.mask.pixels();
  for (std::size_t i = 0; i < d2.size(); ++i) {
    if (!std::isfinite(d2[i])) continue;
    deficit[i] = depth * std::exp(-d2[i] * inv_two_var);
    mask[i] = deficit[i] >= depth / 2.0 ? 1 : 0;
  }
  return raster;
}

SequenceRenderer::SequenceRenderer(SynthConfig config) : config_(std::move(config)) {
  config_.validate();
  const int w = config_.frame_dims.width;
  const int h = config_.frame_dims.height;
  const auto& bg = config_.background;
  const auto& wire = config_.wire;

  // Smooth anatomy-like field: a few long-wavelength plane waves plus broad blobs.
  Rng bg_rng(derive_seed(config_.rng_seed, kStreamBackground));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kWaves = 5;
  struct Wave { double kx, ky, phase, amp; };
  std::vector<Wave> waves;
  double amp_sum = 0.0;
  for (int i = 0; i < kWaves; ++i) {
    const double dir = 2.0 * std::numbers::pi * unit(bg_rng);
    const double wavelength = bg.low_freq_scale * (1.0 + 2.0 * unit(bg_rng));
    const double k = 2.0 * std::numbers::pi / wavelength;
    const double amp = 0.5 + unit(bg_rng);
    waves.push_back({k * std::cos(dir), k * std::sin(dir), 2.0 * std::numbers::pi * unit(bg_rng), amp});
    amp_sum += amp;
  }
  struct Blob { double x, y, radius, amp; };
  std::vector<Blob> blobs;
  for (int i = 0; i < bg.n_blobs; ++i) {
    blobs.push_back({w * unit(bg_rng), h * unit(bg_rng), 25.0 + 35.0 * unit(bg_rng),
                     bg.variation * (2.0 * unit(bg_rng) - 1.0)});
  }
  smooth_ = GrayImage(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (const Wave& wv : waves) v += wv.amp * std::cos(wv.kx * x + wv.ky * y + wv.phase);
      v = bg.mean_level + bg.variation * v / amp_sum;
      for (const Blob& b : blobs) {
        const double dx = x - b.x, dy = y - b.y;
        v += b.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * b.radius * b.radius));
      }
      smooth_(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }

  // Wire control points: a gently turning walk through the frame.
  motion_omega_ = 2.0 * std::numbers::pi / kMotionPeriodFrames;
  motion_radius_ = wire.motion_amplitude / (std::numbers::sqrt2 * motion_omega_);
  Rng geo_rng(derive_seed(config_.rng_seed, kStreamGeometry));
  const double side = std::min(w, h);
  const double margin = std::min(side / 4.0, 24.0 + motion_radius_);
  const double chord = wire.length_fraction * side;
  const int n = wire.n_control_points;
  const double step = chord / (n - 1);
  double heading = 2.0 * std::numbers::pi * unit(geo_rng);
  Point2 p{w / 2.0 - 0.5 * chord * std::cos(heading), h / 2.0 - 0.5 * chord * std::sin(heading)};
  auto clamp_point = [&](Point2 q) {
    return Point2{std::clamp(q.x, margin, w - margin), std::clamp(q.y, margin, h - margin)};
  };
  base_control_.push_back(clamp_point(p));
  for (int i = 1; i < n; ++i) {
    heading += 0.8 * (unit(geo_rng) - 0.5);
    p = {p.x + step * std::cos(heading), p.y + step * std::sin(heading)};
    base_control_.push_back(clamp_point(p));
  }
  Rng motion_rng(derive_seed(config_.rng_seed, kStreamMotion));
  for (int i = 0; i < n; ++i) {
    phases_.push_back({2.0 * std::numbers::pi * unit(motion_rng), 2.0 * std::numbers::pi * unit(motion_rng)});
  }
}

std::vector<Point2> SequenceRenderer::control_points(int frame_index) const {
  std::vector<Point2> pts = base_control_;
  const double t = motion_omega_ * frame_index;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i].x += motion_radius_ * std::sin(t + phases_[i].x);
    pts[i].y += motion_radius_ * std::sin(t + phases_[i].y);
  }
  return pts;
}

std::vector<Point2> SequenceRenderer::visible_centerline(int frame_index) const {
  return polyline_tail(catmull_rom(control_points(frame_index)), config_.wire.radiopaque_fraction);
}

std::pair<BinaryMask, BBox> SequenceRenderer::ground_truth(int frame_index) const {
  WireRaster raster = rasterize_wire(config_.frame_dims, visible_centerline(frame_index),
                                     config_.wire.depth, config_.wire.width_sigma);
  const auto box = tight_box(raster.mask);
  return {std::move(raster.mask), box.value_or(BBox{})};
}

FrameSample SequenceRenderer::render(int frame_index) const {
  FrameSample sample;
  sample.background = smooth_;
  add_gaussian_noise(sample.background, config_.background.noise_std,
                     derive_seed(config_.rng_seed, kStreamNoise, static_cast<std::uint64_t>(frame_index)));
  sample.background = clamped_unit(std::move(sample.background));

  WireRaster raster = rasterize_wire(config_.frame_dims, visible_centerline(frame_index),
                                     config_.wire.depth, config_.wire.width_sigma);
  sample.frame = GrayImage(config_.frame_dims.width, config_.frame_dims.height);
  const auto bg = sample.background.pixels();
  const auto deficit = raster.deficit.pixels();
  auto dst = sample.frame.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = static_cast<float>(std::clamp(bg[i] - deficit[i], 0.0, 1.0));
  }
  sample.gt_box = tight_box(raster.mask).value_or(BBox{});
  sample.mask = std::move(raster.mask);
  return sample;
}

SynthSequence render_sequence(const SynthConfig& config, bool keep_backgrounds) {
  const SequenceRenderer renderer(config);
  SynthSequence seq;
  for (int i = 0; i < config.n_frames; ++i) {
    FrameSample s = renderer.render(i);
    seq.frames.push_back(std::move(s.frame));
    seq.gt_masks.push_back(std::move(s.mask));
    seq.gt_boxes.push_back(s.gt_box);
    if (keep_backgrounds) seq.backgrounds.push_back(std::move(s.background));
  }
  return seq;
}

std::pair<GrayImage, BinaryMask> fuse_guidewire(const GrayImage& wire_image, const BinaryMask& wire_mask,
                                                const GrayImage& background) {
  if (!wire_image.same_shape(wire_mask) || !wire_image.same_shape(background)) {
    throw DataError("fuse_guidewire: image, mask and background must share dimensions");
  }
  const int w = wire_image.width();
  const int h = wire_image.height();
  GrayImage out = background;
  std::vector<float> ring;
  ring.reserve(8 * kRingRadius);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (wire_mask(x, y) == 0) continue;
      ring.clear();
      for (int dy = -kRingRadius; dy <= kRingRadius; ++dy) {
        for (int dx = -kRingRadius; dx <= kRingRadius; ++dx) {
          if (std::abs(dx) != kRingRadius && std::abs(dy) != kRingRadius) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || wire_mask(nx, ny) != 0) continue;
          ring.push_back(wire_image(nx, ny));
        }
      }
      if (ring.empty()) continue;
      const auto mid = ring.begin() + static_cast<std::ptrdiff_t>(ring.size() / 2);
      std::nth_element(ring.begin(), mid, ring.end());
      double local = *mid;
      if (ring.size() % 2 == 0) {
        local = 0.5 * (local + *std::max_element(ring.begin(), mid));
      }
      const double deficit = local - wire_image(x, y);
      const double bg = background(x, y);
      out(x, y) = static_cast<float>(std::clamp(std::min(bg, bg - deficit), 0.0, 1.0));
    }
  }
  return {std::move(out), wire_mask};
}

DisplacementField elastic_field(Dims dims, const ElasticParams& params) {
  if (!(params.amplitude >= 0.0)) throw ConfigError("elastic: amplitude must be >= 0");
  if (!(params.grid_spacing > 0.0)) throw ConfigError("elastic: grid_spacing must be > 0");
  const int w = dims.width;
  const int h = dims.height;
  DisplacementField field{ScalarField(w, h, 0.0), ScalarField(w, h, 0.0)};
  if (params.amplitude == 0.0 || w == 0 || h == 0) return field;

  const double s = params.grid_spacing;
  // Nodes at g * s for g in [-1, G + 2]; stored with an offset of one.
  const int gx_count = static_cast<int>(std::ceil((w - 1) / s)) + 4;
  const int gy_count = static_cast<int>(std::ceil((h - 1) / s)) + 4;
  Rng rng(derive_seed(params.seed, kStreamElastic));
  // amplitude bounds each node offset; draws are Gaussian with std amplitude / 3, clamped
  std::normal_distribution<double> offset(0.0, params.amplitude / 3.0);
  const auto draw = [&] { return std::clamp(offset(rng), -params.amplitude, params.amplitude); };
  ScalarField node_x(gx_count, gy_count), node_y(gx_count, gy_count);
  for (int j = 0; j < gy_count; ++j) {
    for (int i = 0; i < gx_count; ++i) {
      node_x(i, j) = draw();
      node_y(i, j) = draw();
    }
  }

  auto interpolate = [&](const ScalarField& nodes, ScalarField& dense) {
    // Along x for every node row, then along y.
    ScalarField rows(w, gy_count);
    for (int j = 0; j < gy_count; ++j) {
      for (int x = 0; x < w; ++x) {
        const double u = x / s;
        const int i = static_cast<int>(std::floor(u));
        const auto wt = catmull_rom_weights(u - i);
        double v = 0.0;
        for (int k = 0; k < 4; ++k) v += wt[k] * nodes(i + k, j);  // node i-1+k, offset +1
        rows(x, j) = v;
      }
    }
    for (int y = 0; y < h; ++y) {
      const double u = y / s;
      const int i = static_cast<int>(std::floor(u));
      const auto wt = catmull_rom_weights(u - i);
      for (int x = 0; x < w; ++x) {
        double v = 0.0;
        for (int k = 0; k < 4; ++k) v += wt[k] * rows(x, i + k);
        dense(x, y) = v;
      }
    }
  };
  interpolate(node_x, field.dx);
  interpolate(node_y, field.dy);

  if (params.boundary_fixed) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dist = std::min({x, y, w - 1 - x, h - 1 - y});
        const double r = std::clamp(dist / s, 0.0, 1.0);
        const double weight = r * r * (3.0 - 2.0 * r);
        field.dx(x, y) *= weight;
        field.dy(x, y) *= weight;
      }
    }
  }
  return field;
}

std::pair<GrayImage, BinaryMask> elastic_deform(const GrayImage& image, const BinaryMask& mask,
                                                const ElasticParams& params) {
  if (!image.same_shape(mask)) throw DataError("elastic_deform: image and mask differ in shape");
  const int w = image.width();
  const int h = image.height();
  const DisplacementField field = elastic_field({w, h}, params);
  GrayImage out_image(w, h);
  BinaryMask out_mask(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = x + field.dx(x, y);
      const double sy = y + field.dy(x, y);
      out_image(x, y) = static_cast<float>(sample_bilinear(image, sx, sy));
      const int nx = static_cast<int>(std::lround(sx));
      const int ny = static_cast<int>(std::lround(sy));
      if (nx >= 0 && ny >= 0 && nx < w && ny < h) out_mask(x, y) = mask(nx, ny);
    }
  }
  return {std::move(out_image), std::move(out_mask)};
}

GrayImage photometric_perturb(const GrayImage& image, double brightness_ratio, double contrast_ratio) {
  if (!(brightness_ratio > 0.0) || !(contrast_ratio > 0.0)) {
    throw ConfigError("photometric_perturb: ratios must be positive");
  }
  const double mean = mean_intensity(image);
  GrayImage out(image.width(), image.height());
  const auto in = image.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < in.size(); ++i) {
    dst[i] = static_cast<float>(
        std::clamp(contrast_ratio * (in[i] - mean) + mean * brightness_ratio, 0.0, 1.0));
  }
  return out;
}

LineImage render_line(const LineSpec& spec) {
  const int w = spec.dims.width;
  const int h = spec.dims.height;
  const double theta = spec.angle_deg * std::numbers::pi / 180.0;
  const double nx = -std::sin(theta);
  const double ny = std::cos(theta);
  const double cx = w / 2 + 0.5 + spec.offset * nx;
  const double cy = h / 2 + 0.5 + spec.offset * ny;
  LineImage out{GrayImage(w, h), GrayImage(w, h), BinaryMask(w, h, 0), BinaryMask(w, h, 0)};
  const double inv_two_var = 1.0 / (2.0 * spec.width_sigma * spec.width_sigma);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = (x + 0.5 - cx) * nx + (y + 0.5 - cy) * ny;
      const double deficit = spec.depth * std::exp(-d * d * inv_two_var);
      out.clean(x, y) = static_cast<float>(std::clamp(spec.background - deficit, 0.0, 1.0));
      out.mask(x, y) = deficit >= spec.depth / 2.0 ? 1 : 0;
      out.centerline(x, y) = std::abs(d) <= 0.5 ? 1 : 0;
    }
  }
  out.image = out.clean;
  add_gaussian_noise(out.image, spec.noise_std, derive_seed(spec.seed, kStreamLine));
  out.image = clamped_unit(std::move(out.image));
  return out;
}

}  // namespace gwtrack

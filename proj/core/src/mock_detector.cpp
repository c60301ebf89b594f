#include "gwtrack/mock_detector.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gwtrack/errors.hpp"
#include "gwtrack/rng.hpp"

namespace gwtrack {

namespace {

constexpr std::uint64_t kStreamDetector = 0x6465746563746f72ULL;

// Spurious box scale relative to the true box, log-uniform.
constexpr double kSpuriousScaleLo = 0.3;
constexpr double kSpuriousScaleHi = 1.5;

bool is_fraction(double v) { return v >= 0.0 && v <= 1.0; }

double uniform_in(Rng& rng, double lo, double hi) {
  if (hi <= lo) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

void NoiseProfile::validate() const {
  if (!(jitter_px >= 0.0)) throw ConfigError("mock_detector: jitter_px must be >= 0");
  if (!is_fraction(drop_rate) || !is_fraction(spurious_rate)) {
    throw ConfigError("mock_detector: drop_rate and spurious_rate must lie in [0,1]");
  }
  if (!is_fraction(spurious_conf_lo) || !is_fraction(spurious_conf_hi) ||
      spurious_conf_lo > spurious_conf_hi || !is_fraction(true_conf_lo) ||
      !is_fraction(true_conf_hi) || true_conf_lo > true_conf_hi) {
    throw ConfigError("mock_detector: confidence ranges must satisfy 0 <= lo <= hi <= 1");
  }
}

std::vector<Detection> mock_detect(const BBox& gt_box, Dims frame, const NoiseProfile& profile,
                                   long frame_index) {
  profile.validate();
  Rng rng(derive_seed(profile.rng_seed, kStreamDetector, static_cast<std::uint64_t>(frame_index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Detection> out;

  // Every draw happens unconditionally so the stream layout is fixed.
  const bool dropped = unit(rng) < profile.drop_rate;
  double corner[4] = {0.0, 0.0, 0.0, 0.0};
  if (profile.jitter_px > 0.0) {
    std::normal_distribution<double> jitter(0.0, profile.jitter_px);
    for (double& c : corner) c = jitter(rng);
  }
  const double true_conf = uniform_in(rng, profile.true_conf_lo, profile.true_conf_hi);
  if (!dropped) {
    BBox b{gt_box.x_min + corner[0], gt_box.y_min + corner[1], gt_box.x_max + corner[2],
           gt_box.y_max + corner[3]};
    if (b.x_min > b.x_max) std::swap(b.x_min, b.x_max);
    if (b.y_min > b.y_max) std::swap(b.y_min, b.y_max);
    b.x_min = std::clamp(b.x_min, 0.0, static_cast<double>(frame.width));
    b.x_max = std::clamp(b.x_max, 0.0, static_cast<double>(frame.width));
    b.y_min = std::clamp(b.y_min, 0.0, static_cast<double>(frame.height));
    b.y_max = std::clamp(b.y_max, 0.0, static_cast<double>(frame.height));
    out.push_back({b, true_conf});
  }

  int n_spurious = 0;
  if (profile.spurious_rate > 0.0) {
    n_spurious = std::poisson_distribution<int>(profile.spurious_rate)(rng);
  }
  for (int i = 0; i < n_spurious; ++i) {
    const double scale = std::exp(uniform_in(rng, std::log(kSpuriousScaleLo), std::log(kSpuriousScaleHi)));
    const double bw = std::min(std::max(gt_box.width(), 1.0) * scale, static_cast<double>(frame.width));
    const double bh = std::min(std::max(gt_box.height(), 1.0) * scale, static_cast<double>(frame.height));
    const double x0 = uniform_in(rng, 0.0, frame.width - bw);
    const double y0 = uniform_in(rng, 0.0, frame.height - bh);
    const double conf = uniform_in(rng, profile.spurious_conf_lo, profile.spurious_conf_hi);
    out.push_back({{x0, y0, x0 + bw, y0 + bh}, conf});
  }
  return out;
}

}  // namespace gwtrack

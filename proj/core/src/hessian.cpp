#include "gwtrack/hessian.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <string>

#include "gwtrack/errors.hpp"

namespace gwtrack {

namespace {

// Reflect-101 border: -1 -> 1, n -> n-2.
int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

template <typename T>
ScalarField diff_x_impl(const Field<T>& f) {
  const int w = f.width();
  const int h = f.height();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto in = f.row(y);
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      const double next = in[reflect_index(x + 1, w)];
      const double prev = in[reflect_index(x - 1, w)];
      dst[x] = 0.5 * (next - prev);
    }
  }
  return out;
}

template <typename T>
ScalarField diff_y_impl(const Field<T>& f) {
  const int w = f.width();
  const int h = f.height();
  ScalarField out(w, h);
  for (int y = 0; y < h; ++y) {
    const auto next = f.row(reflect_index(y + 1, h));
    const auto prev = f.row(reflect_index(y - 1, h));
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      dst[x] = 0.5 * (static_cast<double>(next[x]) - static_cast<double>(prev[x]));
    }
  }
  return out;
}

struct ScaleMaps {
  ScalarField lambda1;
  ScalarField lambda2;
  ScalarField response;
};

ScaleMaps process_scale(const GrayImage& image, double sigma, const HessianConfig& config,
                        bool keep_eigen) {
  const HessianField h = second_gradients(gaussian_smooth(image, sigma));
  auto [l1, l2] = eigen_maps(h);
  ScalarField response = enhancement_response(ridge_strength(l1, l2, config.polarity), config.tau_j);
  if (!keep_eigen) return {{}, {}, std::move(response)};
  return {std::move(l1), std::move(l2), std::move(response)};
}

std::vector<ScaleMaps> process_all_scales(const GrayImage& image, const HessianConfig& config,
                                          bool keep_eigen) {
  config.validate();
  const auto& sigmas = config.scales.sigmas;
  std::vector<ScaleMaps> per_scale;
  per_scale.reserve(sigmas.size());
  if (config.parallel_scales && sigmas.size() > 1) {
    std::vector<std::future<ScaleMaps>> jobs;
    jobs.reserve(sigmas.size());
    for (double s : sigmas) {
      jobs.push_back(std::async(std::launch::async, process_scale, std::cref(image), s,
                                std::cref(config), keep_eigen));
    }
    for (auto& job : jobs) per_scale.push_back(job.get());
  } else {
    for (double s : sigmas) per_scale.push_back(process_scale(image, s, config, keep_eigen));
  }
  return per_scale;
}

ScalarField max_over_scales(std::vector<ScaleMaps>& per_scale) {
  ScalarField combined = std::move(per_scale.front().response);
  for (std::size_t s = 1; s < per_scale.size(); ++s) {
    auto dst = combined.pixels();
    const auto src = per_scale[s].response.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], src[i]);
  }
  return combined;
}

}  // namespace

void ScaleBank::validate() const {
  if (sigmas.empty()) throw ConfigError("scale bank: sigma list is empty");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0) || !std::isfinite(sigmas[i])) {
      throw ConfigError("scale bank: sigma " + std::to_string(sigmas[i]) + " is not positive");
    }
    if (i > 0 && !(sigmas[i] > sigmas[i - 1])) {
      throw ConfigError("scale bank: sigmas must be strictly increasing");
    }
  }
}

void HessianConfig::validate() const {
  scales.validate();
  if (!(tau_j > 0.0 && tau_j <= 1.0)) throw ConfigError("hessian: tau_j must lie in (0,1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("hessian: alpha must lie in [0,1]");
}

EigenPair symmetric_eigenvalues(double dxx, double dxy, double dyy) noexcept {
  const double trace = dxx + dyy;
  const double diff = dxx - dyy;
  const double root = std::sqrt(diff * diff + 4.0 * dxy * dxy);
  return {(trace - root) / 2.0, (trace + root) / 2.0};
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("gaussian: sigma must be positive, got " + std::to_string(sigma));
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

GrayImage gaussian_smooth(const GrayImage& image, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int w = image.width();
  const int h = image.height();
  if (image.empty()) return image;

  // Horizontal pass through a padded row buffer.
  GrayImage horiz(w, h);
  std::vector<double> padded(static_cast<std::size_t>(w + 2 * radius));
  for (int y = 0; y < h; ++y) {
    const auto in = image.row(y);
    for (int i = -radius; i < w + radius; ++i) padded[i + radius] = in[reflect_index(i, w)];
    auto dst = horiz.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k.size(); ++j) acc += k[j] * padded[x + j];
      dst[x] = static_cast<float>(acc);
    }
  }

  // Vertical pass accumulating whole rows.
  GrayImage out(w, h);
  std::vector<double> acc(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int j = -radius; j <= radius; ++j) {
      const double kv = k[static_cast<std::size_t>(j + radius)];
      const auto src = horiz.row(reflect_index(y + j, h));
      for (int x = 0; x < w; ++x) acc[x] += kv * src[x];
    }
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) dst[x] = static_cast<float>(acc[x]);
  }
  return out;
}

ScalarField diff_x(const GrayImage& field) { return diff_x_impl(field); }
ScalarField diff_x(const ScalarField& field) { return diff_x_impl(field); }
ScalarField diff_y(const GrayImage& field) { return diff_y_impl(field); }
ScalarField diff_y(const ScalarField& field) { return diff_y_impl(field); }

HessianField second_gradients(const GrayImage& feature) {
  const ScalarField dx = diff_x(feature);
  return {diff_x(dx), diff_y(dx), diff_y(diff_y(feature))};
}

std::pair<ScalarField, ScalarField> eigen_maps(const HessianField& h) {
  const int w = h.d_xx.width();
  const int ht = h.d_xx.height();
  if (!h.d_xy.same_shape(w, ht) || !h.d_yy.same_shape(w, ht)) {
    throw DataError("eigen_maps: hessian components differ in shape");
  }
  ScalarField l1(w, ht);
  ScalarField l2(w, ht);
  const auto xx = h.d_xx.pixels();
  const auto xy = h.d_xy.pixels();
  const auto yy = h.d_yy.pixels();
  auto o1 = l1.pixels();
  auto o2 = l2.pixels();
  for (std::size_t i = 0; i < xx.size(); ++i) {
    const EigenPair e = symmetric_eigenvalues(xx[i], xy[i], yy[i]);
    o1[i] = e.lambda1;
    o2[i] = e.lambda2;
  }
  return {std::move(l1), std::move(l2)};
}

ScalarField ridge_strength(const ScalarField& lambda1, const ScalarField& lambda2,
                           Polarity polarity) {
  if (polarity == Polarity::dark) return lambda2;
  ScalarField out = lambda1;
  for (double& v : out.pixels()) v = -v;
  return out;
}

ScalarField enhancement_response(const ScalarField& ridge, double tau_j) {
  if (!(tau_j > 0.0 && tau_j <= 1.0)) throw ConfigError("enhancement: tau_j must lie in (0,1]");
  ScalarField out(ridge.width(), ridge.height(), 0.0);
  if (ridge.empty()) return out;
  const double peak = *std::max_element(ridge.pixels().begin(), ridge.pixels().end());
  if (!(peak > 0.0)) return out;
  const double cutoff = tau_j * peak;
  const auto in = ridge.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double l = in[i];
    if (l <= 0.0) continue;
    const double rho = std::max(l, cutoff);
    if (l >= rho / 2.0) {
      dst[i] = 1.0;
    } else {
      const double q = 3.0 / (l + rho);
      dst[i] = l * l * (rho - l) * q * q * q;
    }
  }
  return out;
}

ScalarField enhancement_response(std::span<const ScalarField> ridge_per_scale, double tau_j) {
  if (ridge_per_scale.empty()) throw std::invalid_argument("enhancement: no scales supplied");
  ScalarField combined = enhancement_response(ridge_per_scale.front(), tau_j);
  for (const ScalarField& ridge : ridge_per_scale.subspan(1)) {
    if (!ridge.same_shape(combined)) throw DataError("enhancement: scale maps differ in shape");
    const ScalarField r = enhancement_response(ridge, tau_j);
    auto dst = combined.pixels();
    const auto src = r.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], src[i]);
  }
  return combined;
}

GrayImage fuse(const GrayImage& image, const ScalarField& enhancement, double alpha,
               Polarity polarity) {
  if (!image.same_shape(enhancement)) throw DataError("fuse: image and enhancement differ in shape");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("fuse: alpha must lie in [0,1]");
  const double sign = polarity == Polarity::dark ? -1.0 : 1.0;
  GrayImage out(image.width(), image.height());
  const auto in = image.pixels();
  const auto e = enhancement.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < in.size(); ++i) {
    dst[i] = static_cast<float>(std::clamp(in[i] + sign * alpha * e[i], 0.0, 1.0));
  }
  return out;
}

EnhanceResult enhance(const GrayImage& image, const HessianConfig& config) {
  std::vector<ScaleMaps> per_scale = process_all_scales(image, config, true);
  EnhanceResult result;
  result.maps.sigmas = config.scales.sigmas;
  for (auto& s : per_scale) {
    result.maps.lambda1.push_back(std::move(s.lambda1));
    result.maps.lambda2.push_back(std::move(s.lambda2));
  }
  result.maps.enhancement = max_over_scales(per_scale);
  result.fused = fuse(image, result.maps.enhancement, config.alpha, config.polarity);
  return result;
}

ScalarField enhancement_map(const GrayImage& image, const HessianConfig& config) {
  std::vector<ScaleMaps> per_scale = process_all_scales(image, config, false);
  return max_over_scales(per_scale);
}

}  // namespace gwtrack

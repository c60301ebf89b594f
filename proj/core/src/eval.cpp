#include "gwtrack/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "gwtrack/errors.hpp"
#include "gwtrack/synth.hpp"

namespace gwtrack {

namespace {

constexpr double kFar = 1e20;

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), in place on one line.
void edt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  auto intersect = [&](int q, int p) {
    return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
  };
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double diff = q - v[k];
    d[q] = diff * diff + f[v[k]];
  }
}

double directed_hausdorff(const BinaryMask& from, const ScalarField& to_edt) {
  double worst = 0.0;
  const auto m = from.pixels();
  const auto d = to_edt.pixels();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] != 0) worst = std::max(worst, d[i]);
  }
  return std::sqrt(worst);
}

void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* what) {
  if (!a.same_shape(b)) throw DataError(std::string(what) + ": mask dimensions differ");
}

}  // namespace

FrameDetection classify_frame(std::span<const BBox> boxes, const BinaryMask& gt_mask) {
  FrameDetection out;
  const std::size_t wire_px = count_set(gt_mask);
  bool covered = false;
  for (const BBox& box : boxes) {
    std::size_t inside = 0;
    if (wire_px > 0) {
      const int x0 = std::max(0, static_cast<int>(std::floor(box.x_min - 0.5)));
      const int y0 = std::max(0, static_cast<int>(std::floor(box.y_min - 0.5)));
      const int x1 = std::min(gt_mask.width(), static_cast<int>(std::ceil(box.x_max)) + 1);
      const int y1 = std::min(gt_mask.height(), static_cast<int>(std::ceil(box.y_max)) + 1);
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          if (gt_mask(x, y) != 0 && box.contains_pixel(x, y)) ++inside;
        }
      }
    }
    if (inside == 0) ++out.fp;
    if (wire_px > 0 && inside == wire_px) covered = true;
  }
  out.tp = covered;
  out.fn = wire_px > 0 && !covered;
  return out;
}

DetectionTally tally_detections(std::span<const std::vector<BBox>> boxes_per_frame,
                                std::span<const BinaryMask> gt_masks) {
  if (boxes_per_frame.size() != gt_masks.size()) {
    throw DataError("tally_detections: " + std::to_string(boxes_per_frame.size()) +
                    " predicted frames vs " + std::to_string(gt_masks.size()) + " ground-truth frames");
  }
  DetectionTally tally;
  tally.per_frame.reserve(gt_masks.size());
  for (std::size_t i = 0; i < gt_masks.size(); ++i) {
    const FrameDetection f = classify_frame(boxes_per_frame[i], gt_masks[i]);
    tally.tp += f.tp ? 1 : 0;
    tally.fn += f.fn ? 1 : 0;
    tally.fp += f.fp;
    tally.fp_frames += f.fp > 0 ? 1 : 0;
    tally.per_frame.push_back(f);
  }
  return tally;
}

DetectionTally tally_detections(std::span<const TrackerState> states, std::span<const BinaryMask> gt_masks) {
  std::vector<std::vector<BBox>> boxes;
  boxes.reserve(states.size());
  for (const TrackerState& s : states) boxes.push_back(s.confirmed);
  return tally_detections(boxes, gt_masks);
}

ScalarField squared_distance_transform(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  ScalarField out(w, h, kFar);
  if (mask.empty()) return out;
  const int n = std::max(w, h);
  std::vector<double> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);

  // Columns.
  f.resize(static_cast<std::size_t>(h));
  d.resize(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = mask(x, y) != 0 ? 0.0 : kFar;
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) out(x, y) = d[y];
  }
  // Rows.
  f.resize(static_cast<std::size_t>(w));
  d.resize(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = out(x, y);
    edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) out(x, y) = d[x] >= kFar / 2 ? std::numeric_limits<double>::infinity() : d[x];
  }
  return out;
}

double hausdorff_distance(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "hausdorff_distance");
  const bool a_empty = count_set(a) == 0;
  const bool b_empty = count_set(b) == 0;
  if (a_empty && b_empty) return 0.0;
  if (a_empty || b_empty) return std::numeric_limits<double>::infinity();
  return std::max(directed_hausdorff(a, squared_distance_transform(b)),
                  directed_hausdorff(b, squared_distance_transform(a)));
}

SegScores seg_scores(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "seg_scores");
  SegScores s;
  const auto p = pred.pixels();
  const auto g = gt.pixels();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool pi = p[i] != 0;
    const bool gi = g[i] != 0;
    s.tp += (pi && gi) ? 1 : 0;
    s.fp += (pi && !gi) ? 1 : 0;
    s.fn += (!pi && gi) ? 1 : 0;
  }
  const auto tp = static_cast<double>(s.tp);
  const auto fp = static_cast<double>(s.fp);
  const auto fn = static_cast<double>(s.fn);
  s.dice = (2 * tp + fp + fn) > 0 ? 2 * tp / (2 * tp + fp + fn) : 1.0;
  s.sensitivity = (tp + fn) > 0 ? tp / (tp + fn) : 1.0;
  s.fdr = (tp + fp) > 0 ? fp / (tp + fp) : 0.0;
  s.hd = hausdorff_distance(pred, gt);
  const double diagonal = std::hypot(static_cast<double>(gt.width()), static_cast<double>(gt.height()));
  s.hd_normalized = diagonal > 0.0 ? s.hd / diagonal : 0.0;
  return s;
}

PooledScores pool(std::span<const SegScores> scores) {
  PooledScores out;
  out.frames = scores.size();
  if (scores.empty()) return out;
  std::size_t finite = 0;
  for (const SegScores& s : scores) {
    out.dice += s.dice;
    out.sensitivity += s.sensitivity;
    out.fdr += s.fdr;
    if (std::isfinite(s.hd)) {
      out.hd += s.hd;
      out.hd_normalized += s.hd_normalized;
      ++finite;
    } else {
      ++out.undefined_hd;
    }
  }
  const auto n = static_cast<double>(scores.size());
  out.dice /= n;
  out.sensitivity /= n;
  out.fdr /= n;
  if (finite > 0) {
    out.hd /= static_cast<double>(finite);
    out.hd_normalized /= static_cast<double>(finite);
  }
  return out;
}

DifficultSplit difficult_split(std::span<const SegScores> per_frame, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("difficult_split: threshold must be > 0");
  DifficultSplit split;
  std::vector<SegScores> hard, easy;
  for (std::size_t i = 0; i < per_frame.size(); ++i) {
    if (per_frame[i].hd_normalized > threshold) {
      split.difficult.push_back(i);
      hard.push_back(per_frame[i]);
    } else {
      split.easy.push_back(i);
      easy.push_back(per_frame[i]);
    }
  }
  split.difficult_scores = pool(hard);
  split.easy_scores = pool(easy);
  return split;
}

std::vector<double> default_ratio_grid() {
  std::vector<double> grid;
  for (int i = 6; i <= 14; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<SweepRow> robustness_sweep(const FramePipeline& pipeline, std::span<const GrayImage> frames,
                                       std::span<const BinaryMask> gt_masks,
                                       std::span<const double> brightness_grid,
                                       std::span<const double> contrast_grid) {
  if (brightness_grid.empty() || contrast_grid.empty()) throw ConfigError("robustness_sweep: empty ratio grid");
  if (frames.size() != gt_masks.size()) throw DataError("robustness_sweep: frame and mask counts differ");
  std::vector<SweepRow> rows;
  for (double b : brightness_grid) {
    for (double c : contrast_grid) {
      double sum = 0.0;
      for (std::size_t i = 0; i < frames.size(); ++i) {
        const BinaryMask pred = pipeline(photometric_perturb(frames[i], b, c), i);
        sum += seg_scores(pred, gt_masks[i]).dice;
      }
      rows.push_back({b, c, frames.empty() ? 0.0 : sum / static_cast<double>(frames.size())});
    }
  }
  return rows;
}

BinaryMask ThresholdBaseline::segment(const GrayImage& frame, const BBox& box) const {
  BinaryMask out(frame.width(), frame.height(), 0);
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      if (frame(x, y) < threshold && box.contains_pixel(x, y)) out(x, y) = 1;
    }
  }
  return out;
}

ThresholdBaseline ThresholdBaseline::calibrate(std::span<const GrayImage> frames,
                                               std::span<const BinaryMask> gt_masks,
                                               std::span<const BBox> boxes) {
  if (frames.size() != gt_masks.size() || frames.size() != boxes.size()) {
    throw DataError("ThresholdBaseline::calibrate: frames, masks and boxes differ in count");
  }
  ThresholdBaseline best;
  double best_dice = -1.0;
  for (int step = 5; step <= 95; ++step) {
    const ThresholdBaseline candidate{step / 100.0};
    double sum = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      sum += seg_scores(candidate.segment(frames[i], boxes[i]), gt_masks[i]).dice;
    }
    if (sum > best_dice) {
      best_dice = sum;
      best = candidate;
    }
  }
  return best;
}

void write_per_frame_csv(std::ostream& os, std::span<const SegScores> scores) {
  os << "frame,dice,sensitivity,fdr,hd_px,hd_normalized\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const SegScores& s = scores[i];
    os << i << ',' << s.dice << ',' << s.sensitivity << ',' << s.fdr << ',' << s.hd << ','
       << s.hd_normalized << '\n';
  }
}

void write_summary_csv(std::ostream& os, const PooledScores& all, const DifficultSplit& split) {
  os << "subset,frames,dice,sensitivity,fdr,hd_px,hd_normalized,undefined_hd\n";
  auto line = [&](const char* name, const PooledScores& p) {
    os << name << ',' << p.frames << ',' << p.dice << ',' << p.sensitivity << ',' << p.fdr << ','
       << p.hd << ',' << p.hd_normalized << ',' << p.undefined_hd << '\n';
  };
  line("all", all);
  line("difficult", split.difficult_scores);
  line("easy", split.easy_scores);
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "brightness_ratio,contrast_ratio,mean_dice\n";
  for (const SweepRow& r : rows) os << r.brightness << ',' << r.contrast << ',' << r.mean_dice << '\n';
}

void write_tally_csv(std::ostream& os, const DetectionTally& tally) {
  os << "tp,fp,fn,fp_frames\n" << tally.tp << ',' << tally.fp << ',' << tally.fn << ',' << tally.fp_frames << '\n';
}

}  // namespace gwtrack

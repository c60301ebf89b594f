#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gwtrack/geometry.hpp"
#include "gwtrack/image.hpp"
#include "gwtrack/tracker.hpp"

namespace gwtrack::io {

// ---------------------------------------------------------------------------
// Images. PNG and binary PGM, 8 or 16 bit grayscale; chosen by extension.
// Reading normalizes to [0,1]. All IO failures throw DataError.
// ---------------------------------------------------------------------------

enum class BitDepth { u8 = 8, u16 = 16 };

[[nodiscard]] GrayImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const GrayImage& image, BitDepth depth = BitDepth::u16);

/// Masks are stored as 8-bit 0/255; any nonzero pixel reads back as set.
[[nodiscard]] BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

/// Scalar field rescaled to [0,1] by its own min/max (flat fields write as 0).
void write_normalized(const std::filesystem::path& path, const ScalarField& field);

/// Frame with the mask's boundary pixels burned in black.
[[nodiscard]] GrayImage overlay_contour(const GrayImage& frame, const BinaryMask& mask);

// ---------------------------------------------------------------------------
// Detection and track streams: one JSON object per line.
//   {"frame": n, "detections": [{"box": [x0, y0, x1, y1], "conf": c}, ...]}
//   {"frame": n, "confirmed": [[x0, y0, x1, y1], ...], "tentative": [...]}
// ---------------------------------------------------------------------------

struct DetectionFrame {
  long frame = 0;
  std::vector<Detection> detections;
  std::optional<bool> temporal_stacking;  ///< whether the upstream detector stacked consecutive frames
};

/// Parses a detection stream. Malformed lines throw DataError naming the line number.
[[nodiscard]] std::vector<DetectionFrame> read_detections(std::istream& in);
[[nodiscard]] std::vector<DetectionFrame> read_detections(const std::filesystem::path& path);
[[nodiscard]] DetectionFrame parse_detection_line(const std::string& line, long line_number);

[[nodiscard]] std::string format_detection_line(const DetectionFrame& frame);
void write_detections(std::ostream& out, const std::vector<DetectionFrame>& frames);

[[nodiscard]] std::string format_track_line(const TrackerState& state);
[[nodiscard]] TrackerState parse_track_line(const std::string& line, long line_number);
[[nodiscard]] std::vector<TrackerState> read_tracks(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dataset manifest (JSON): the contract between synth, run and eval.
// ---------------------------------------------------------------------------

struct ManifestFrame {
  long index = 0;
  std::string image;  ///< path relative to the manifest directory
  std::string mask;   ///< may be empty when no ground truth is available
  std::optional<BBox> gt_box;
};

struct Manifest {
  std::filesystem::path root;  ///< directory containing the manifest; not serialized
  std::string config_json;     ///< echo of the generating configuration (serialized JSON)
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  bool temporal_stacking = false;
  std::vector<ManifestFrame> frames;

  [[nodiscard]] std::filesystem::path image_path(std::size_t i) const { return root / frames[i].image; }
  [[nodiscard]] std::filesystem::path mask_path(std::size_t i) const { return root / frames[i].mask; }
};

[[nodiscard]] Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string read_text(const std::filesystem::path& path);

}  // namespace gwtrack::io

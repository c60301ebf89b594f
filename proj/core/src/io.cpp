#include "gwtrack/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gwtrack/errors.hpp"

namespace gwtrack::io {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw DataError("cannot open " + path.string());
  return f;
}

// Samples as integers in [0, maxval], row-major.
struct RawImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> samples;
};

GrayImage to_gray(const RawImage& raw) {
  GrayImage out(raw.width, raw.height);
  auto dst = out.pixels();
  const double scale = 1.0 / raw.maxval;
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<float>(raw.samples[i] * scale);
  return out;
}

RawImage from_gray(const GrayImage& image, BitDepth depth) {
  RawImage raw{image.width(), image.height(), depth == BitDepth::u8 ? 255 : 65535, {}};
  raw.samples.resize(image.size());
  const auto src = image.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = std::clamp(static_cast<double>(src[i]), 0.0, 1.0);
    raw.samples[i] = static_cast<std::uint16_t>(std::lround(v * raw.maxval));
  }
  return raw;
}

// --- PGM -------------------------------------------------------------------

std::string next_token(std::istream& in) {
  std::string tok;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

RawImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  if (next_token(in) != "P5") throw DataError(path.string() + ": not a binary PGM (P5)");
  RawImage raw;
  try {
    raw.width = std::stoi(next_token(in));
    raw.height = std::stoi(next_token(in));
    raw.maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw DataError(path.string() + ": malformed PGM header");
  }
  if (raw.width <= 0 || raw.height <= 0 || raw.maxval <= 0 || raw.maxval > 65535) {
    throw DataError(path.string() + ": unsupported PGM dimensions or maxval");
  }
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height;
  const std::size_t bytes_per = raw.maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(n * bytes_per);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw DataError(path.string() + ": truncated PGM data");
  raw.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw.samples[i] = bytes_per == 2 ? static_cast<std::uint16_t>((buf[2 * i] << 8U) | buf[2 * i + 1]) : buf[i];
  }
  return raw;
}

void write_pgm(const fs::path& path, const RawImage& raw) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << raw.width << ' ' << raw.height << '\n' << raw.maxval << '\n';
  std::vector<unsigned char> buf;
  buf.reserve(raw.samples.size() * 2);
  for (std::uint16_t s : raw.samples) {
    if (raw.maxval > 255) buf.push_back(static_cast<unsigned char>(s >> 8U));
    buf.push_back(static_cast<unsigned char>(s & 0xFFU));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

// --- PNG -------------------------------------------------------------------

void png_error_fn(png_structp png, png_const_charp) { std::longjmp(png_jmpbuf(png), 1); }
void png_warning_fn(png_structp, png_const_charp) {}

RawImage read_png(const fs::path& path) {
  FilePtr file = open_file(path, "rb");
  RawImage raw;
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError(path.string() + ": invalid or unsupported PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  if ((color & PNG_COLOR_MASK_ALPHA) != 0) png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // host little-endian samples
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  pixels.resize(rowbytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  raw.width = static_cast<int>(width);
  raw.height = static_cast<int>(height);
  raw.maxval = out_depth == 16 ? 65535 : 255;
  raw.samples.resize(static_cast<std::size_t>(width) * height);
  for (png_uint_32 y = 0; y < height; ++y) {
    for (png_uint_32 x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      if (out_depth == 16) {
        const unsigned char* p = rows[y] + 2 * x;
        raw.samples[i] = static_cast<std::uint16_t>(p[0] | (p[1] << 8U));
      } else {
        raw.samples[i] = rows[y][x];
      }
    }
  }
  return raw;
}

void write_png(const fs::path& path, const RawImage& raw) {
  FilePtr file = open_file(path, "wb");
  const bool wide = raw.maxval > 255;
  const std::size_t rowbytes = static_cast<std::size_t>(raw.width) * (wide ? 2 : 1);
  std::vector<unsigned char> pixels(rowbytes * raw.height);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    if (wide) {
      pixels[2 * i] = static_cast<unsigned char>(raw.samples[i] >> 8U);
      pixels[2 * i + 1] = static_cast<unsigned char>(raw.samples[i] & 0xFFU);
    } else {
      pixels[i] = static_cast<unsigned char>(raw.samples[i]);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(raw.height));
  for (int y = 0; y < raw.height; ++y) rows[y] = pixels.data() + y * rowbytes;

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(raw.width), static_cast<png_uint_32>(raw.height),
               wide ? 16 : 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

RawImage read_raw(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  throw DataError(path.string() + ": unsupported image extension (expected .png or .pgm)");
}

void write_raw(const fs::path& path, const RawImage& raw) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, raw);
  if (ext == ".pgm") return write_pgm(path, raw);
  throw DataError(path.string() + ": unsupported image extension (expected .png or .pgm)");
}

// --- JSON helpers ------------------------------------------------------------

BBox parse_box(const ordered_json& j) {
  if (!j.is_array() || j.size() != 4) throw DataError("box must be an array of four numbers");
  BBox b;
  for (const auto& v : j) {
    if (!v.is_number()) throw DataError("box coordinates must be numbers");
  }
  b = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) throw DataError("box must satisfy x_min <= x_max and y_min <= y_max");
  return b;
}

ordered_json box_json(const BBox& b) { return ordered_json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

ordered_json parse_json_line(const std::string& line, long line_number) {
  try {
    return ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("line " + std::to_string(line_number) + ": invalid JSON (" + e.what() + ")");
  }
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

GrayImage read_image(const fs::path& path) { return to_gray(read_raw(path)); }

void write_image(const fs::path& path, const GrayImage& image, BitDepth depth) {
  write_raw(path, from_gray(image, depth));
}

BinaryMask read_mask(const fs::path& path) {
  const RawImage raw = read_raw(path);
  BinaryMask mask(raw.width, raw.height, 0);
  auto dst = mask.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = raw.samples[i] != 0 ? 1 : 0;
  return mask;
}

void write_mask(const fs::path& path, const BinaryMask& mask) {
  RawImage raw{mask.width(), mask.height(), 255, {}};
  raw.samples.resize(mask.size());
  const auto src = mask.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) raw.samples[i] = src[i] != 0 ? 255 : 0;
  write_raw(path, raw);
}

void write_normalized(const fs::path& path, const ScalarField& field) {
  GrayImage out(field.width(), field.height(), 0.0F);
  if (!field.empty()) {
    const auto [lo, hi] = std::minmax_element(field.pixels().begin(), field.pixels().end());
    const double range = *hi - *lo;
    if (range > 0.0) {
      auto dst = out.pixels();
      const auto src = field.pixels();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<float>((src[i] - *lo) / range);
    }
  }
  write_image(path, out, BitDepth::u8);
}

GrayImage overlay_contour(const GrayImage& frame, const BinaryMask& mask) {
  if (!frame.same_shape(mask)) throw DataError("overlay_contour: frame and mask differ in shape");
  GrayImage out = frame;
  const int w = mask.width();
  const int h = mask.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(x, y) == 0) continue;
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || mask(x - 1, y) == 0 ||
                        mask(x + 1, y) == 0 || mask(x, y - 1) == 0 || mask(x, y + 1) == 0;
      if (edge) out(x, y) = 0.0F;
    }
  }
  return out;
}

DetectionFrame parse_detection_line(const std::string& line, long line_number) {
  const ordered_json j = parse_json_line(line, line_number);
  const std::string where = "line " + std::to_string(line_number) + ": ";
  try {
    if (!j.is_object() || !j.contains("frame") || !j.contains("detections")) {
      throw DataError("expected an object with \"frame\" and \"detections\"");
    }
    if (!j["frame"].is_number_integer()) throw DataError("\"frame\" must be an integer");
    if (!j["detections"].is_array()) throw DataError("\"detections\" must be an array");
    DetectionFrame frame;
    frame.frame = j["frame"].get<long>();
    for (const auto& d : j["detections"]) {
      if (!d.is_object() || !d.contains("box") || !d.contains("conf") || !d["conf"].is_number()) {
        throw DataError("each detection needs \"box\" and numeric \"conf\"");
      }
      const double conf = d["conf"].get<double>();
      if (!(conf >= 0.0 && conf <= 1.0)) throw DataError("confidence must lie in [0,1]");
      frame.detections.push_back({parse_box(d["box"]), conf});
    }
    if (j.contains("temporal_stacking")) {
      if (!j["temporal_stacking"].is_boolean()) throw DataError("\"temporal_stacking\" must be a boolean");
      frame.temporal_stacking = j["temporal_stacking"].get<bool>();
    }
    return frame;
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  }
}

std::vector<DetectionFrame> read_detections(std::istream& in) {
  std::vector<DetectionFrame> frames;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (blank(line)) continue;
    frames.push_back(parse_detection_line(line, line_number));
  }
  return frames;
}

std::vector<DetectionFrame> read_detections(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_detections(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_detection_line(const DetectionFrame& frame) {
  ordered_json j;
  j["frame"] = frame.frame;
  j["detections"] = ordered_json::array();
  for (const Detection& d : frame.detections) {
    ordered_json det;
    det["box"] = box_json(d.box);
    det["conf"] = d.confidence;
    j["detections"].push_back(std::move(det));
  }
  if (frame.temporal_stacking) j["temporal_stacking"] = *frame.temporal_stacking;
  return j.dump();
}

void write_detections(std::ostream& out, const std::vector<DetectionFrame>& frames) {
  for (const DetectionFrame& f : frames) out << format_detection_line(f) << '\n';
}

std::string format_track_line(const TrackerState& state) {
  ordered_json j;
  j["frame"] = state.frame_index;
  j["confirmed"] = ordered_json::array();
  j["tentative"] = ordered_json::array();
  for (const BBox& b : state.confirmed) j["confirmed"].push_back(box_json(b));
  for (const BBox& b : state.tentative) j["tentative"].push_back(box_json(b));
  return j.dump();
}

TrackerState parse_track_line(const std::string& line, long line_number) {
  const ordered_json j = parse_json_line(line, line_number);
  try {
    if (!j.is_object() || !j.contains("frame") || !j.contains("confirmed") || !j.contains("tentative")) {
      throw DataError("expected an object with \"frame\", \"confirmed\" and \"tentative\"");
    }
    TrackerState s;
    s.frame_index = j["frame"].get<long>();
    for (const auto& b : j["confirmed"]) s.confirmed.push_back(parse_box(b));
    for (const auto& b : j["tentative"]) s.tentative.push_back(parse_box(b));
    return s;
  } catch (const DataError& e) {
    throw DataError("line " + std::to_string(line_number) + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw DataError("line " + std::to_string(line_number) + ": " + e.what());
  }
}

std::vector<TrackerState> read_tracks(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<TrackerState> states;
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (blank(line)) continue;
    states.push_back(parse_track_line(line, line_number));
  }
  return states;
}

Manifest read_manifest(const fs::path& path) {
  const std::string text = read_text(path);
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  Manifest m;
  m.root = path.has_parent_path() ? path.parent_path() : fs::path(".");
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.temporal_stacking = j.value("temporal_stacking", false);
    if (j.contains("config")) m.config_json = j["config"].dump();
    for (const auto& f : j.at("frames")) {
      ManifestFrame frame;
      frame.index = f.at("index").get<long>();
      frame.image = f.at("image").get<std::string>();
      frame.mask = f.value("mask", std::string{});
      if (f.contains("gt_box") && !f["gt_box"].is_null()) frame.gt_box = parse_box(f["gt_box"]);
      m.frames.push_back(std::move(frame));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": malformed manifest (" + e.what() + ")");
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return m;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  ordered_json j;
  j["seed"] = manifest.seed;
  j["width"] = manifest.width;
  j["height"] = manifest.height;
  j["temporal_stacking"] = manifest.temporal_stacking;
  j["config"] = manifest.config_json.empty() ? ordered_json::object() : ordered_json::parse(manifest.config_json);
  j["frames"] = ordered_json::array();
  for (const ManifestFrame& f : manifest.frames) {
    ordered_json e;
    e["index"] = f.index;
    e["image"] = f.image;
    if (!f.mask.empty()) e["mask"] = f.mask;
    e["gt_box"] = f.gt_box ? box_json(*f.gt_box) : ordered_json(nullptr);
    j["frames"].push_back(std::move(e));
  }
  write_text(path, j.dump(2) + "\n");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gwtrack::io

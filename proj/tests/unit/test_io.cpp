#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gwtrack/config.hpp"
#include "gwtrack/errors.hpp"
#include "gwtrack/io.hpp"

namespace gwtrack {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gwtrack_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

GrayImage quantized_image(int w, int h, int levels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> q(0, levels - 1);
  GrayImage im(w, h);
  for (float& v : im.pixels()) v = static_cast<float>(q(rng)) / static_cast<float>(levels - 1);
  return im;
}

TEST_F(IoTest, ImagesRoundTripAtBothDepthsAndFormats) {
  for (const char* ext : {".png", ".pgm"}) {
    const GrayImage im8 = quantized_image(37, 23, 256, 1);
    io::write_image(dir_ / (std::string("a8") + ext), im8, io::BitDepth::u8);
    EXPECT_EQ(io::read_image(dir_ / (std::string("a8") + ext)), im8) << ext;

    const GrayImage im16 = quantized_image(19, 31, 65536, 2);
    io::write_image(dir_ / (std::string("a16") + ext), im16, io::BitDepth::u16);
    const GrayImage back = io::read_image(dir_ / (std::string("a16") + ext));
    ASSERT_EQ(back.width(), 19);
    for (std::size_t i = 0; i < back.size(); ++i) EXPECT_NEAR(back.pixels()[i], im16.pixels()[i], 1e-7);
  }
}

TEST_F(IoTest, OutOfRangeValuesAreClampedOnWrite) {
  const GrayImage im(2, 1, std::vector<float>{-0.5F, 2.0F});
  io::write_image(dir_ / "c.png", im, io::BitDepth::u8);
  const GrayImage back = io::read_image(dir_ / "c.png");
  EXPECT_EQ(back(0, 0), 0.0F);
  EXPECT_EQ(back(1, 0), 1.0F);
}

TEST_F(IoTest, MasksAreStoredAs0And255) {
  BinaryMask m(5, 4, 0);
  m(1, 2) = 1;
  m(4, 3) = 1;
  io::write_mask(dir_ / "m.png", m);
  EXPECT_EQ(io::read_mask(dir_ / "m.png"), m);
  const GrayImage raw = io::read_image(dir_ / "m.png");
  EXPECT_EQ(raw(1, 2), 1.0F);
  EXPECT_EQ(raw(0, 0), 0.0F);
  io::write_mask(dir_ / "m.pgm", m);
  EXPECT_EQ(io::read_mask(dir_ / "m.pgm"), m);
}

TEST_F(IoTest, BadImagesAreDataErrors) {
  EXPECT_THROW((void)io::read_image(dir_ / "missing.png"), DataError);
  io::write_text(dir_ / "junk.png", "not a png");
  EXPECT_THROW((void)io::read_image(dir_ / "junk.png"), DataError);
  io::write_text(dir_ / "junk.pgm", "P2 3 3 255\n");
  EXPECT_THROW((void)io::read_image(dir_ / "junk.pgm"), DataError);
  io::write_text(dir_ / "short.pgm", "P5 4 4 255\nab");
  EXPECT_THROW((void)io::read_image(dir_ / "short.pgm"), DataError);
  EXPECT_THROW(io::write_image(dir_ / "x.tif", GrayImage(2, 2)), DataError);
}

TEST(Detections, LineRoundTrip) {
  io::DetectionFrame f;
  f.frame = 12;
  f.detections = {{{1.5, 2.25, 30, 40}, 0.875}, {{0, 0, 1, 1}, 0.0}};
  f.temporal_stacking = true;
  const io::DetectionFrame back = io::parse_detection_line(io::format_detection_line(f), 1);
  EXPECT_EQ(back.frame, 12);
  EXPECT_EQ(back.detections, f.detections);
  EXPECT_EQ(back.temporal_stacking, std::optional<bool>(true));
}

TEST(Detections, StreamSkipsBlankLinesAndNamesBadOnes) {
  std::istringstream ok(R"({"frame": 0, "detections": []}

{"frame": 1, "detections": [{"box": [0, 0, 5, 5], "conf": 0.5}]}
)");
  const auto frames = io::read_detections(ok);
  ASSERT_EQ(frames.size(), 2U);
  EXPECT_EQ(frames[1].detections.size(), 1U);

  const auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      (void)io::read_detections(in);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(error_of("{\"frame\": 0, \"detections\": []}\n{oops\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of(R"({"frame": 0, "detections": [{"box": [0, 0, 5], "conf": 0.5}]})").find("line 1"),
            std::string::npos);
  EXPECT_FALSE(error_of(R"({"frame": 0, "detections": [{"box": [5, 0, 1, 5], "conf": 0.5}]})").empty());
  EXPECT_FALSE(error_of(R"({"frame": 0, "detections": [{"box": [0, 0, 1, 5], "conf": 1.5}]})").empty());
  EXPECT_FALSE(error_of(R"({"frame": "0", "detections": []})").empty());
  EXPECT_FALSE(error_of(R"({"frame": 0})").empty());
  EXPECT_FALSE(error_of(R"({"frame": 0, "detections": [], "temporal_stacking": 1})").empty());
}

TEST(Tracks, LineRoundTrip) {
  TrackerState s;
  s.frame_index = 7;
  s.confirmed = {{1, 2, 3, 4}};
  s.tentative = {{10.5, 20, 30, 40.125}, {0, 0, 2, 2}};
  EXPECT_EQ(io::parse_track_line(io::format_track_line(s), 1), s);
  EXPECT_THROW((void)io::parse_track_line("{\"frame\": 1}", 3), DataError);
}

TEST_F(IoTest, ManifestRoundTrip) {
  io::Manifest m;
  m.config_json = R"({"synth":{"n_frames":2}})";
  m.seed = 77;
  m.width = 64;
  m.height = 48;
  m.temporal_stacking = true;
  m.frames = {{0, "frames/frame_0000.png", "masks/mask_0000.png", BBox{1, 2, 3, 4}},
              {1, "frames/frame_0001.png", "", std::nullopt}};
  io::write_manifest(dir_ / "manifest.json", m);
  const io::Manifest back = io::read_manifest(dir_ / "manifest.json");
  EXPECT_EQ(back.root, dir_);
  EXPECT_EQ(back.config_json, m.config_json);
  EXPECT_EQ(back.seed, 77U);
  EXPECT_EQ(back.width, 64);
  EXPECT_TRUE(back.temporal_stacking);
  ASSERT_EQ(back.frames.size(), 2U);
  EXPECT_EQ(back.frames[0].gt_box, m.frames[0].gt_box);
  EXPECT_EQ(back.frames[1].mask, "");
  EXPECT_FALSE(back.frames[1].gt_box.has_value());
  EXPECT_EQ(back.image_path(1), dir_ / "frames/frame_0001.png");

  io::write_text(dir_ / "bad.json", "{\"frames\": 3}");
  EXPECT_THROW((void)io::read_manifest(dir_ / "bad.json"), DataError);
  EXPECT_THROW((void)io::read_manifest(dir_ / "none.json"), DataError);
}

TEST(Overlay, BurnsOnlyTheBoundary) {
  BinaryMask m(7, 7, 0);
  for (int y = 1; y < 6; ++y) {
    for (int x = 1; x < 6; ++x) m(x, y) = 1;
  }
  const GrayImage out = io::overlay_contour(GrayImage(7, 7, 0.5F), m);
  EXPECT_EQ(out(1, 1), 0.0F);
  EXPECT_EQ(out(3, 3), 0.5F);
  EXPECT_EQ(out(0, 0), 0.5F);
}

TEST(Config, DefaultsRoundTripThroughText) {
  const std::string text = dump_config(PipelineConfig{});
  EXPECT_EQ(dump_config(parse_config(text)), text);
  EXPECT_EQ(dump_config(parse_config("{}")), text);
}

TEST(Config, ShippedDefaultFileMatchesTheCode) {
  EXPECT_EQ(io::read_text(GWTRACK_DEFAULT_CONFIG), dump_config(PipelineConfig{}) + "\n");
  EXPECT_NO_THROW((void)load_config(GWTRACK_DEFAULT_CONFIG));
}

TEST(Config, PartialSectionsOverrideOnlyTheirKeys) {
  const PipelineConfig c = parse_config(
      R"({"hessian": {"sigmas": [1.0, 2.0], "polarity": "bright"}, "synth": {"wire": {"depth": 0.25}},
          "pipeline": {"refine": false}})");
  EXPECT_EQ(c.hessian.scales.sigmas, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(c.hessian.polarity, Polarity::bright);
  EXPECT_EQ(c.hessian.tau_j, 0.75);
  EXPECT_EQ(c.synth.wire.depth, 0.25);
  EXPECT_EQ(c.synth.wire.width_sigma, 1.5);
  EXPECT_FALSE(c.refine);
}

TEST(Config, RejectsUnknownKeysWrongTypesAndBadValues) {
  EXPECT_THROW((void)parse_config("{\"hesian\": {}}"), ConfigError);
  EXPECT_THROW((void)parse_config("{\"hessian\": {\"tauj\": 0.5}}"), ConfigError);
  EXPECT_THROW((void)parse_config("{\"hessian\": {\"tau_j\": \"high\"}}"), ConfigError);
  EXPECT_THROW((void)parse_config("{\"hessian\": 3}"), ConfigError);
  EXPECT_THROW((void)parse_config("{\"hessian\": {\"polarity\": \"grey\"}}"), ConfigError);
  EXPECT_THROW((void)parse_config("{\"segmenter\": {\"hi_thresh\": 0.1}}"), ConfigError);
  EXPECT_THROW((void)parse_config("{\"synth\": {\"frame_dims\": [1, 2, 3]}}"), ConfigError);
  EXPECT_THROW((void)parse_config("{\"synth\": {\"wire\": {\"colour\": 1}}}"), ConfigError);
  EXPECT_THROW((void)parse_config("[1, 2]"), ConfigError);
  EXPECT_THROW((void)parse_config("{not json"), ConfigError);
  EXPECT_THROW((void)load_config("/nonexistent/config.json"), ConfigError);
}

}  // namespace
}  // namespace gwtrack

#include <bit>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "landchange/raster.hpp"
#include "landchange/raster_io.hpp"
#include "support/test_support.hpp"

using namespace landchange;
using landchange::testing::TempDir;

namespace {

Raster iota_raster(std::size_t w, std::size_t h, std::size_t bands, std::optional<double> nodata = std::nullopt) {
  std::vector<float> data(w * h * bands);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(i) * 0.25f;
  return Raster(w, h, bands, GeoTransform{100.0, 30.0, 0.0, 500.0, 0.0, -30.0}, nodata, std::move(data));
}

}  // namespace

TEST(Raster, GetPixelSingleElement) {
  Raster r(1, 1, 1, {}, std::nullopt, {0.5f});
  EXPECT_EQ(r.get_pixel(0, 0, 0), 0.5f);
}

TEST(Raster, GetPixelBandSequentialLayout) {
  // a..h = 1..8; band 1 holds e,f,g,h and (row 1, col 0) is g.
  Raster r(2, 2, 2, {}, std::nullopt, {1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_EQ(get_pixel(r, 1, 0, 1), 7.0f);

  // Exhaustive: band*(w*h) + row*w + col.
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t row = 0; row < 2; ++row)
      for (std::size_t col = 0; col < 2; ++col) EXPECT_EQ(r.get_pixel(row, col, b), float(b * 4 + row * 2 + col + 1));
}

TEST(Raster, GetPixelOutOfBoundsNamesAxis) {
  Raster r = iota_raster(2, 2, 2);
  try {
    r.get_pixel(0, 0, 5);
    FAIL() << "expected BoundsError";
  } catch (const BoundsError& e) {
    EXPECT_NE(std::string(e.what()).find("band"), std::string::npos);
  }
  EXPECT_THROW(r.get_pixel(2, 0, 0), BoundsError);
  EXPECT_THROW(r.get_pixel(0, 9, 0), BoundsError);
}

TEST(Raster, LayoutPropertyOnSmallGrids) {
  for (std::size_t w = 1; w <= 4; ++w)
    for (std::size_t h = 1; h <= 4; ++h)
      for (std::size_t nb = 1; nb <= 3; ++nb) {
        Raster r = iota_raster(w, h, nb);
        for (std::size_t b = 0; b < nb; ++b)
          for (std::size_t row = 0; row < h; ++row)
            for (std::size_t col = 0; col < w; ++col)
              ASSERT_EQ(r.get_pixel(row, col, b), r.data()[b * w * h + row * w + col]);
      }
}

TEST(Raster, ConstructionRejectsBadShapes) {
  EXPECT_THROW(Raster(2, 2, 1, {}, std::nullopt, std::vector<float>(3)), ValidationError);
  EXPECT_THROW(Raster(0, 2, 1, {}, std::nullopt, {}), ValidationError);
  EXPECT_THROW(Raster(1, 1, 1, GeoTransform{0, 0, 0, 0, 0, 1}, std::nullopt, {1}), ValidationError);
  EXPECT_THROW(Raster(1, 1, 1, GeoTransform{0, 1, 0, 0, 0, 0}, std::nullopt, {1}), ValidationError);
}

TEST(Raster, MaskRequiresAllBands) {
  Raster r(2, 1, 2, {}, -9999.0, {-9999, -9999, -9999, 3});
  EXPECT_TRUE(r.is_masked(0));
  EXPECT_FALSE(r.is_masked(1));  // partial nodata is a valid pixel
}

TEST(Crop, FullExtentIsIdentity) {
  Raster r = iota_raster(4, 3, 2);
  EXPECT_EQ(crop(r, {0, 0, 3, 4}), r);
}

TEST(Crop, MatchesDirectReads) {
  Raster r = iota_raster(4, 4, 3);
  Raster c = crop(r, {1, 1, 2, 2});
  ASSERT_EQ(c.width(), 2u);
  ASSERT_EQ(c.height(), 2u);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t row = 0; row < 2; ++row)
      for (std::size_t col = 0; col < 2; ++col) EXPECT_EQ(c.get_pixel(row, col, b), r.get_pixel(row + 1, col + 1, b));
  // Origin moves by one pixel in each direction through the affine.
  EXPECT_DOUBLE_EQ(c.geotransform().origin_x, 130.0);
  EXPECT_DOUBLE_EQ(c.geotransform().origin_y, 470.0);
}

TEST(Crop, OutOfBoundsWindow) {
  Raster r = iota_raster(4, 4, 1);
  EXPECT_THROW(crop(r, {3, 3, 2, 2}), BoundsError);
  EXPECT_THROW(crop(r, {0, 0, 0, 1}), BoundsError);
}

TEST(Crop, CompositionOfNestedWindows) {
  Raster r = iota_raster(9, 7, 2);
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(gen); };
    Window a{pick(0, 6), pick(0, 8), 0, 0};
    a.rows = pick(1, 7 - a.row0);
    a.cols = pick(1, 9 - a.col0);
    Window b{pick(0, a.rows - 1), pick(0, a.cols - 1), 0, 0};
    b.rows = pick(1, a.rows - b.row0);
    b.cols = pick(1, a.cols - b.col0);
    const Window composed{a.row0 + b.row0, a.col0 + b.col0, b.rows, b.cols};
    ASSERT_EQ(crop(crop(r, a), b), crop(r, composed));
  }
}

TEST(SceneIo, RoundTripWithNodata) {
  TempDir dir;
  Raster r = iota_raster(5, 3, 4, -1.5);
  write_scene(r, dir / "scene.json");
  EXPECT_EQ(read_scene(dir / "scene.json"), r);
  const auto header = io::read_json(dir / "scene.json");
  EXPECT_TRUE(header.contains("nodata"));
  EXPECT_EQ(header.at("data"), "scene.bin");
}

TEST(SceneIo, HandEncodedLittleEndianPayload) {
  TempDir dir;
  // 1.0f = 0x3F800000, 2.0f = 0x40000000, -0.5f = 0xBF000000, 0.25f = 0x3E800000
  const std::vector<std::uint8_t> bytes = {0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x40,
                                           0x00, 0x00, 0x00, 0xBF, 0x00, 0x00, 0x80, 0x3E};
  io::write_bytes(dir / "v.bin", bytes);
  io::write_text(dir / "v.json", R"({"width": 2, "height": 2, "bands": 1, "dtype": "float32",
    "layout": "band-sequential", "byte_order": "little-endian",
    "geotransform": [0, 1, 0, 0, 0, 1], "data": "v.bin"})");
  const Raster r = read_scene(dir / "v.json");
  EXPECT_EQ(r.get_pixel(0, 0, 0), 1.0f);
  EXPECT_EQ(r.get_pixel(0, 1, 0), 2.0f);
  EXPECT_EQ(r.get_pixel(1, 0, 0), -0.5f);
  EXPECT_EQ(r.get_pixel(1, 1, 0), 0.25f);
  EXPECT_FALSE(r.nodata().has_value());
}

TEST(SceneIo, SizeMismatch) {
  TempDir dir;
  io::write_bytes(dir / "v.bin", std::vector<std::uint8_t>(12));
  io::write_text(dir / "v.json", R"({"width": 2, "height": 2, "bands": 1, "dtype": "float32",
    "layout": "band-sequential", "byte_order": "little-endian",
    "geotransform": [0, 1, 0, 0, 0, 1], "data": "v.bin"})");
  try {
    read_scene(dir / "v.json");
    FAIL() << "expected size mismatch";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("size mismatch"), std::string::npos);
  }
}

TEST(SceneIo, MissingAndMalformedFiles) {
  TempDir dir;
  EXPECT_THROW(read_scene(dir / "absent.json"), IoError);
  io::write_text(dir / "bad.json", "{not json");
  EXPECT_THROW(read_scene(dir / "bad.json"), ValidationError);
  io::write_text(dir / "nodata.json", R"({"width": 1, "height": 1, "bands": 1, "dtype": "float32",
    "layout": "band-sequential", "byte_order": "little-endian",
    "geotransform": [0, 1, 0, 0, 0, 1], "data": "missing.bin"})");
  EXPECT_THROW(read_scene(dir / "nodata.json"), IoError);
}

TEST(SceneIo, ElevenBandPayloadSize) {
  TempDir dir;
  Raster r = iota_raster(6, 5, 11);
  write_scene(r, dir / "l8.json");
  EXPECT_EQ(fs::file_size(dir / "l8.bin"), 44u * 6 * 5);
}

TEST(ByteMapIo, RoundTripAllChangeCodes) {
  TempDir dir;
  ByteMap m(5, 1, GeoTransform{10, 2, 0, 20, 0, -2}, MapKind::changemap, {0, 1, 2, 3, 255});
  write_bytemap(m, dir / "c.json");
  EXPECT_EQ(read_bytemap(dir / "c.json"), m);
  EXPECT_EQ(io::read_json(dir / "c.json").at("kind"), "changemap");
}

TEST(ByteMapIo, OutOfDomainCodeReportsPosition) {
  TempDir dir;
  ByteMap m(3, 2, {}, MapKind::classmap, {0, 1, 0, 1, 7, 0});
  write_bytemap(m, dir / "m.json");
  try {
    read_bytemap(dir / "m.json");
    FAIL() << "expected validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("code 7"), std::string::npos) << msg;
    EXPECT_NE(msg.find("row 1, col 1"), std::string::npos) << msg;
  }
}

TEST(ByteMapIo, ClassmapRejectsTransitionCodes) {
  TempDir dir;
  write_bytemap(ByteMap(2, 1, {}, MapKind::classmap, {0, 3}), dir / "m.json");
  EXPECT_THROW(read_bytemap(dir / "m.json"), ValidationError);
}

TEST(ByteMapIo, EmptyMapRejected) {
  EXPECT_THROW(ByteMap(0, 0, {}, MapKind::classmap, {}), ValidationError);
  TempDir dir;
  io::write_bytes(dir / "e.bin", {});
  io::write_text(dir / "e.json", R"({"width": 0, "height": 0, "bands": 1, "dtype": "uint8", "kind": "classmap",
    "layout": "band-sequential", "byte_order": "little-endian",
    "geotransform": [0, 1, 0, 0, 0, 1], "data": "e.bin"})");
  EXPECT_THROW(read_bytemap(dir / "e.json"), ValidationError);
}

TEST(RasterIo, RandomizedRoundTripIsBitExact) {
  TempDir dir;
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 25; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 9), nb(1, 11);
    const std::size_t w = dim(gen), h = dim(gen), b = nb(gen);
    std::vector<float> data(w * h * b);
    for (auto& v : data) v = std::bit_cast<float>(static_cast<std::uint32_t>(gen()) & 0xFF7FFFFFu);  // finite or subnormal
    std::optional<double> nodata;
    if (gen() % 2) nodata = static_cast<double>(static_cast<float>(std::normal_distribution<>(0, 1000)(gen)));
    Raster r(w, h, b, GeoTransform{double(gen() % 1000), 0.5 + double(gen() % 7), 0.0, double(gen() % 1000), 0.0, -1.0},
             nodata, std::move(data));
    write_scene(r, dir / "r.json");
    const Raster back = read_scene(dir / "r.json");
    ASSERT_EQ(back.width(), r.width());
    ASSERT_EQ(back.nodata(), r.nodata());
    ASSERT_EQ(back.geotransform(), r.geotransform());
    ASSERT_EQ(0, std::memcmp(back.data().data(), r.data().data(), r.data().size_bytes()));
  }
}

#include <random>

#include <gtest/gtest.h>

#include "landchange/change.hpp"
#include "support/test_support.hpp"

using namespace landchange;
using landchange::testing::decode_png;

namespace {

ByteMap classmap(std::size_t w, std::size_t h, std::vector<std::uint8_t> codes) {
  return ByteMap(w, h, {}, MapKind::classmap, std::move(codes));
}

ByteMap random_classmap(std::mt19937_64& gen, std::size_t w, std::size_t h) {
  std::vector<std::uint8_t> c(w * h);
  for (auto& v : c) {
    const auto r = gen() % 5;
    v = r == 4 ? kNodataCode : static_cast<std::uint8_t>(r % 2);
  }
  return classmap(w, h, std::move(c));
}

std::vector<std::uint8_t> codes_of(const ByteMap& m) { return {m.codes().begin(), m.codes().end()}; }

}  // namespace

TEST(DetectChange, Expansion) {
  EXPECT_EQ(detect_change(classmap(1, 1, {0}), classmap(1, 1, {1})).codes()[0], 1);
}

TEST(DetectChange, IdenticalMapsStayOnDiagonal) {
  std::mt19937_64 gen(1);
  const auto m = random_classmap(gen, 12, 9);
  const auto out = detect_change(m, m);
  for (auto c : out.codes()) EXPECT_TRUE(c == 0 || c == 3 || c == 255);
}

TEST(DetectChange, ExhaustiveFivePixelTruthTable) {
  const auto out = detect_change(classmap(5, 1, {0, 0, 1, 1, 255}), classmap(5, 1, {0, 1, 0, 1, 1}));
  EXPECT_EQ(codes_of(out), (std::vector<std::uint8_t>{0, 1, 2, 3, 255}));
  EXPECT_EQ(out.kind(), MapKind::changemap);
}

TEST(DetectChange, FullTruthTableWithNodata) {
  const std::uint8_t values[] = {0, 1, 255};
  for (auto a : values)
    for (auto b : values) {
      const auto out = detect_change(classmap(1, 1, {a}), classmap(1, 1, {b})).codes()[0];
      const std::uint8_t expected = (a == 255 || b == 255) ? 255 : static_cast<std::uint8_t>(2 * a + b);
      EXPECT_EQ(out, expected) << int(a) << "," << int(b);
      if (out != 255) {
        EXPECT_EQ(old_class_of(out), a);
        EXPECT_EQ(new_class_of(out), b);
      }
    }
}

TEST(DetectChange, TimeReversalSwapsOneAndTwo) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_classmap(gen, 15, 11), b = random_classmap(gen, 15, 11);
    const auto fwd = detect_change(a, b), rev = detect_change(b, a);
    for (std::size_t i = 0; i < fwd.pixel_count(); ++i) {
      const auto f = fwd.codes()[i];
      const auto expected = f == 1 ? 2 : f == 2 ? 1 : f;
      EXPECT_EQ(rev.codes()[i], expected);
    }
  }
}

TEST(DetectChange, MismatchesRejected) {
  EXPECT_THROW(detect_change(classmap(2, 1, {0, 1}), classmap(1, 2, {0, 1})), ValidationError);
  const ByteMap shifted(2, 1, GeoTransform{1, 1, 0, 0, 0, 1}, MapKind::classmap, {0, 1});
  EXPECT_THROW(detect_change(classmap(2, 1, {0, 1}), shifted), ValidationError);
  const ByteMap change(2, 1, {}, MapKind::changemap, {0, 1});
  EXPECT_THROW(detect_change(change, classmap(2, 1, {0, 1})), ValidationError);
  EXPECT_THROW(detect_change(classmap(2, 1, {0, 2}), classmap(2, 1, {0, 1})), ValidationError);
}

TEST(ChangeStats, UniformMap) {
  const ByteMap m(10, 10, {}, MapKind::changemap, std::vector<std::uint8_t>(100, 0));
  const auto s = change_stats(m);
  EXPECT_EQ(s.counts[0], 100u);
  EXPECT_EQ(s.area(0), 100.0);
  EXPECT_EQ(s.total(), 100u);
}

TEST(ChangeStats, TruthTableCountsOnePerCode) {
  const ByteMap m(5, 1, GeoTransform{0, 30, 0, 0, 0, -30}, MapKind::changemap, {0, 1, 2, 3, 255});
  const auto s = change_stats(m);
  for (std::uint8_t c = 0; c < 4; ++c) {
    EXPECT_EQ(s.counts[c], 1u);
    EXPECT_EQ(s.area(c), 900.0);
  }
  EXPECT_EQ(s.nodata, 1u);
}

TEST(ChangeStats, AllNodata) {
  const ByteMap m(3, 3, {}, MapKind::changemap, std::vector<std::uint8_t>(9, 255));
  const auto s = change_stats(m);
  EXPECT_EQ(s.nodata, 9u);
  EXPECT_EQ(s.counts, (std::array<std::uint64_t, 4>{}));
}

TEST(ChangeStats, AdditiveOverDisjointWindows) {
  std::mt19937_64 gen(3);
  const auto m = detect_change(random_classmap(gen, 20, 10), random_classmap(gen, 20, 10));
  const auto whole = change_stats(m);
  EXPECT_EQ(whole.total(), 200u);
  for (std::size_t split = 1; split < 10; ++split) {
    const auto top = change_stats(crop(m, {0, 0, split, 20}));
    const auto bottom = change_stats(crop(m, {split, 0, 10 - split, 20}));
    EXPECT_EQ(top + bottom, whole);
  }
}

TEST(Render, SinglePixelRed) {
  const ByteMap m(1, 1, {}, MapKind::changemap, {1});
  const auto img = decode_png(render_map(m));
  EXPECT_EQ(img.width, 1u);
  EXPECT_EQ(img.rgb, (std::vector<std::uint8_t>{255, 0, 0}));
}

TEST(Render, FourTransitionsDecodeToPalette) {
  const ByteMap m(2, 2, {}, MapKind::changemap, {0, 1, 2, 3});
  const auto img = decode_png(render_map(m));
  EXPECT_EQ(img.rgb, (std::vector<std::uint8_t>{0, 128, 0, 255, 0, 0, 0, 0, 255, 128, 0, 128}));
}

TEST(Render, ClassmapPalette) {
  const ByteMap m(3, 1, {}, MapKind::classmap, {0, 1, 255});
  EXPECT_EQ(decode_png(render_map(m)).rgb, (std::vector<std::uint8_t>{0, 128, 0, 200, 200, 200, 0, 0, 0}));
}

TEST(Render, MissingPaletteEntry) {
  const ByteMap m(2, 1, {}, MapKind::changemap, {0, 4});
  try {
    render_map(m);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("code 4"), std::string::npos);
  }
}

TEST(Render, PaletteOverride) {
  const auto pal = palette_from_json(nlohmann::json::parse(R"({"1": [255, 255, 0]})"), default_change_palette());
  const ByteMap m(2, 1, {}, MapKind::changemap, {1, 3});
  EXPECT_EQ(decode_png(render_map(m, pal)).rgb, (std::vector<std::uint8_t>{255, 255, 0, 128, 0, 128}));
  EXPECT_THROW(palette_from_json(nlohmann::json::parse(R"({"x": [1, 2, 3]})"), {}), ValidationError);
  EXPECT_THROW(palette_from_json(nlohmann::json::parse(R"({"1": [1, 2, 300]})"), {}), ValidationError);
  EXPECT_THROW(palette_from_json(nlohmann::json::parse(R"({"1": [1, 2]})"), {}), ValidationError);
}

TEST(Render, LargerMapDecodesPixelExact) {
  std::mt19937_64 gen(5);
  const auto m = detect_change(random_classmap(gen, 57, 31), random_classmap(gen, 57, 31));
  const auto img = decode_png(render_map(m));
  const auto pal = default_change_palette();
  ASSERT_EQ(img.width, 57u);
  ASSERT_EQ(img.height, 31u);
  for (std::size_t i = 0; i < m.pixel_count(); ++i) {
    const auto& rgb = pal.at(m.codes()[i]);
    ASSERT_EQ(img.rgb[3 * i], rgb[0]);
    ASSERT_EQ(img.rgb[3 * i + 1], rgb[1]);
    ASSERT_EQ(img.rgb[3 * i + 2], rgb[2]);
  }
}

#include <gtest/gtest.h>

#include <string>

#include "smear/netpbm.hpp"
#include "smear/raster.hpp"

using namespace smear;

namespace {

Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace

TEST(Raster, IndexingIsRowMajor) {
  GrayImage img(3, 2, 0.0);
  img(1, 2) = 0.5;
  EXPECT_EQ(img.width(), 3);
  EXPECT_EQ(img.height(), 2);
  EXPECT_DOUBLE_EQ(img[5], 0.5);
  EXPECT_TRUE(img.contains(1, 2));
  EXPECT_FALSE(img.contains(2, 0));
  EXPECT_FALSE(img.contains(0, -1));
}

TEST(Raster, RectGeometry) {
  const Rect r{2, 5, 10, 12};
  EXPECT_EQ(r.height(), 4);
  EXPECT_EQ(r.width(), 3);
  EXPECT_TRUE(r.contains(5, 10));
  EXPECT_FALSE(r.contains(6, 10));
  EXPECT_TRUE(r.inside(13, 6));
  EXPECT_FALSE(r.inside(12, 6));
  const Rect clipped = Rect{-3, 4, -1, 50}.clipped_to(Rect{0, 9, 0, 19});
  EXPECT_EQ(clipped, (Rect{0, 4, 0, 19}));
}

TEST(Raster, QuantizeRoundsAndClamps) {
  EXPECT_EQ(quantize(-0.2), 0);
  EXPECT_EQ(quantize(1.7), 255);
  EXPECT_EQ(quantize(0.5), 128);
  EXPECT_EQ(quantize(100.0 / 255.0), 100);
}

TEST(Raster, CropOutsideThrows) {
  GrayImage img(4, 4, 0.25);
  EXPECT_EQ(crop(img, Rect{1, 2, 1, 3}).width(), 3);
  EXPECT_THROW(crop(img, Rect{0, 4, 0, 0}), BoundsError);
}

TEST(Raster, NormalizeFlatGivesZeros) {
  Raster<double> flat(5, 5, 3.0);
  const GrayImage out = normalize_minmax(flat);
  for (double v : out.pixels()) EXPECT_EQ(v, 0.0);
  Raster<double> ramp(2, 1);
  ramp(0, 0) = -1.0;
  ramp(0, 1) = 3.0;
  const GrayImage n = normalize_minmax(ramp);
  EXPECT_EQ(n(0, 0), 0.0);
  EXPECT_EQ(n(0, 1), 1.0);
}

TEST(Netpbm, PgmRoundTripIsExactOn8BitLevels) {
  GrayImage img(7, 3);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<double>((i * 37) % 256) / 255.0;
  const Bytes encoded = save_pgm(img);
  EXPECT_EQ(load_pgm(encoded), img);
  EXPECT_EQ(save_pgm(load_pgm(encoded)), encoded);
}

TEST(Netpbm, HeaderCommentsAndSmallMaxval) {
  static const char raw[] = "P5\n# made by hand\n2 1 # trailing\n3\n\x00\x03";
  const Bytes data = bytes_of(std::string(raw, sizeof raw - 1));
  const GrayImage img = load_pgm(data);
  EXPECT_EQ(img.width(), 2);
  EXPECT_DOUBLE_EQ(img(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(img(0, 1), 1.0);
}

TEST(Netpbm, SixteenBitMaxvalIsRejectedWithOffset) {
  const Bytes data = bytes_of("P5\n2 2\n65535\n");
  try {
    load_pgm(data);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 7u);
    EXPECT_NE(std::string(e.what()).find("maxval"), std::string::npos);
  }
}

TEST(Netpbm, TruncatedAndWrongMagic) {
  EXPECT_THROW(load_pgm(bytes_of("P5\n4 4\n255\nabc")), ParseError);
  EXPECT_THROW(load_pgm(bytes_of("P2\n1 1\n255\n0")), ParseError);
  EXPECT_THROW(load_pgm(bytes_of("")), ParseError);
  EXPECT_THROW(load_pgm(bytes_of("P5\n0 4\n255\n")), ParseError);
}

TEST(Netpbm, PpmRoundTrip) {
  RgbImage img(2, 2);
  img[0] = {0, 0, 255};
  img[1] = {255, 0, 0};
  img[2] = {255, 255, 0};
  img[3] = {0, 255, 255};
  const Bytes encoded = save_ppm(img);
  EXPECT_EQ(std::string(encoded.begin(), encoded.begin() + 11), "P6\n2 2\n255\n");
  EXPECT_EQ(load_ppm(encoded), img);
}

TEST(Netpbm, MaskSavesAsBlackAndWhite) {
  BinaryMask m(2, 1, 0);
  m(0, 1) = 1;
  const Bytes encoded = save_pgm(m);
  EXPECT_EQ(encoded[encoded.size() - 2], 0);
  EXPECT_EQ(encoded.back(), 255);
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "smear/canny.hpp"
#include "smear/hough.hpp"

using namespace smear;

namespace {

GrayImage disc_image(int size, PointRC c, double radius, double inside = 0.3, double outside = 0.8) {
  GrayImage img(size, size, outside);
  for (int r = 0; r < size; ++r)
    for (int q = 0; q < size; ++q) {
      const double a = std::clamp(radius + 0.5 - std::hypot(r - c.row, q - c.col), 0.0, 1.0);
      img(r, q) = outside + a * (inside - outside);
    }
  return img;
}

}  // namespace

TEST(Canny, VerticalStepGivesOneThinLine) {
  GrayImage img(40, 30, 0.2);
  for (int r = 0; r < 30; ++r)
    for (int c = 20; c < 40; ++c) img(r, c) = 0.8;
  const BinaryMask e = canny(img, {});
  for (int r = 3; r < 27; ++r) {
    int on = 0;
    for (int c = 0; c < 40; ++c) on += e(r, c);
    EXPECT_EQ(on, 1) << "row " << r;
    EXPECT_TRUE(e(r, 19) || e(r, 20));
  }
}

TEST(Canny, FlatImageHasNoEdges) {
  EXPECT_EQ(count_foreground(canny(GrayImage(20, 20, 0.4), {})), 0u);
}

TEST(Canny, BorderNeverHoldsEdgesAndEdgesHaveGradient) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GrayImage img(50, 40);
  for (double& v : img.pixels()) v = unit(rng);
  const CannyParams p;
  const BinaryMask e = canny(img, p);
  const Gradient g = smoothed_gradient(img, p.gauss_sigma);
  const CannyThresholds th = canny_thresholds(g.magnitude, p);
  EXPECT_GT(count_foreground(e), 0u);
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 50; ++c) {
      if (r == 0 || c == 0 || r == 39 || c == 49) EXPECT_EQ(e(r, c), 0);
      if (e(r, c)) {
        EXPECT_GT(g.magnitude(r, c), 0.0);
        EXPECT_GE(g.magnitude(r, c), th.low);
      }
    }
}

TEST(Canny, InvalidParameters) {
  CannyParams p;
  p.low_ratio = 1.5;
  EXPECT_THROW(canny(GrayImage(8, 8, 0.0), p), InvalidArgument);
}

TEST(Quantile, LowerQuantile) {
  EXPECT_EQ(quantile_of({5, 1, 4, 2, 3}, 0.5), 3);
  EXPECT_EQ(quantile_of({5, 1, 4, 2}, 0.9), 4);
  EXPECT_EQ(quantile_of({}, 0.9), 0.0);
}

TEST(Hough, AccumulatorMatchesBruteForce) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    BinaryMask edges(60, 50, 0);
    for (auto& px : edges.pixels()) px = rng() % 20 == 0;
    HoughParams p;
    p.radius = 5 + trial * 3;
    const Rect window{10, 35, 5, 40};
    EXPECT_EQ(hough_accumulator(edges, window, p), oracle::hough_votes(edges, window, p.radius));
  }
}

TEST(Hough, CenterOfNoiselessCirclesWithinOnePixel) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> jitter(-5.0, 5.0);
  for (int radius : {20, 40, 60}) {
    const int size = 2 * radius + 60;
    for (int k = 0; k < 20; ++k) {
      const PointRC truth{size / 2.0 + jitter(rng), size / 2.0 + jitter(rng)};
      HoughParams p;
      p.radius = radius;
      const Rect window{size / 2 - 15, size / 2 + 15, size / 2 - 15, size / 2 + 15};
      const auto peak = hough_circle_center(canny(disc_image(size, truth, radius), {}), window, p);
      ASSERT_TRUE(peak.has_value());
      EXPECT_LE(std::abs(peak->center.row - truth.row), 1.0);
      EXPECT_LE(std::abs(peak->center.col - truth.col), 1.0);
    }
  }
}

TEST(Hough, EmptyEdgesAreAbsent) {
  EXPECT_FALSE(hough_circle_center(BinaryMask(200, 200, 0), Rect{50, 150, 50, 150}, {}).has_value());
}

TEST(Hough, OnePercentSpeckleIsAbsent) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 5; ++trial) {
    BinaryMask edges(256, 256, 0);
    for (auto& px : edges.pixels()) px = rng() % 100 == 0;
    EXPECT_FALSE(hough_circle_center(edges, Rect{60, 195, 60, 195}, {}).has_value());
  }
}

TEST(Hough, WindowOutsideImageIsABoundsError) {
  EXPECT_THROW(hough_accumulator(BinaryMask(20, 20, 0), Rect{0, 25, 0, 5}, {}), BoundsError);
}

TEST(Hough, FloorIsFractionOfCircumference) {
  HoughParams p;
  p.min_vote_fraction = 0.5;
  EXPECT_DOUBLE_EQ(p.vote_floor(), 0.5 * 377);
  p.min_vote_fraction = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(WhiteCells, CircleAcceptedBlobRejected) {
  GrayImage img = disc_image(400, {100, 100}, 60);
  // A dark ellipse with no circular rim of radius 60 around it.
  for (int r = 0; r < 400; ++r)
    for (int c = 0; c < 400; ++c) {
      const double u = (c - 300) / 18.0, v = (r - 300) / 6.0;
      if (u * u + v * v <= 1.0) img(r, c) = 0.15;
    }
  const BinaryMask edges = canny(img, {});
  std::vector<NucleusGroup> groups{{1, {1}, {{100, 100}}, Rect{40, 160, 40, 160}},
                                   {2, {2}, {{300, 300}}, Rect{240, 360, 240, 360}}};
  const WhiteCellDetection d = detect_white_cells(groups, edges, {});
  ASSERT_EQ(d.accepted.size(), 1u);
  EXPECT_EQ(d.accepted[0].group_id, 1);
  EXPECT_LE(std::abs(d.accepted[0].center.row - 100), 1.0);
  EXPECT_EQ(d.rejected_group_ids, std::vector<int>{2});
  EXPECT_EQ(d.accepted.size() + d.rejected_group_ids.size(), groups.size());
  EXPECT_TRUE(groups[0].search_window.contains(d.accepted[0].center.row, d.accepted[0].center.col));
}

TEST(WhiteCells, DiscAreaAndCytoplasmPartition) {
  const std::vector<WhiteCell> cells{{{50, 50}, 30, 100, 1}};
  const BinaryMask disc = disc_mask(cells, 120, 100);
  EXPECT_NEAR(static_cast<double>(count_foreground(disc)), std::numbers::pi * 900, 2 * std::numbers::pi * 30);
  BinaryMask nucleus(120, 100, 0);
  for (int r = 40; r < 60; ++r)
    for (int c = 40; c < 60; ++c) nucleus(r, c) = 1;
  nucleus(0, 0) = 1;  // outside the disc
  const BinaryMask cyto = cytoplasm_mask(cells, nucleus);
  std::size_t in_disc_nucleus = 0;
  for (std::size_t i = 0; i < disc.size(); ++i) {
    EXPECT_FALSE(cyto[i] && nucleus[i]);
    in_disc_nucleus += disc[i] && nucleus[i];
  }
  EXPECT_EQ(count_foreground(cyto) + in_disc_nucleus, count_foreground(disc));
  EXPECT_EQ(count_foreground(cytoplasm_mask(cells, BinaryMask(120, 100, 0))), count_foreground(disc));
}

TEST(WhiteCells, RemovalFillsDiscWithOutsideMedian) {
  GrayImage img(100, 100, 0.7);
  for (int r = 40; r < 60; ++r)
    for (int c = 40; c < 60; ++c) img(r, c) = 0.1;
  img(0, 0) = 0.0;
  const std::vector<WhiteCell> cells{{{50, 50}, 20, 80, 1}};
  const GrayImage out = remove_white_cells(img, cells);
  const BinaryMask disc = disc_mask(cells, 100, 100);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_EQ(out[i], disc[i] ? 0.7 : img[i]);
  EXPECT_EQ(remove_white_cells(img, {}), img);
}

TEST(WhiteCells, RemovalCoveringEverythingIsDegenerate) {
  EXPECT_THROW(remove_white_cells(GrayImage(10, 10, 0.5), {{{5, 5}, 60, 10, 1}}), DegenerateError);
}

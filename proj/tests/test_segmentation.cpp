#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "smear/segmentation.hpp"

using namespace smear;

TEST(Otsu, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    Histogram h{};
    for (auto& n : h) n = (rng() % 5 == 0) ? rng() % 3000 : 0;
    h[rng() % 256] += 1;
    EXPECT_EQ(otsu_level(h), oracle::otsu(h)) << "trial " << trial;
  }
}

TEST(Otsu, BimodalSplitsBetweenModes) {
  Histogram h{};
  h[40] = 500;
  h[200] = 500;
  const int t = otsu_level(h);
  EXPECT_GE(t, 40);
  EXPECT_LT(t, 200);
  EXPECT_EQ(t, 40);  // smallest level among the tied plateau
}

TEST(Otsu, SingleOccupiedBinReturnsIt) {
  Histogram h{};
  h[117] = 9;
  EXPECT_EQ(otsu_level(h), 117);
}

TEST(Otsu, EmptyHistogramIsDegenerate) {
  Histogram h{};
  EXPECT_THROW(otsu_level(h), DegenerateError);
}

TEST(DarkClass, SecondPassIsolatesDarkestOfThreeClasses) {
  Histogram h{};
  h[30] = 200;     // nuclei
  h[140] = 3000;   // red cells
  h[190] = 20000;  // background
  EXPECT_GE(dark_class_level(h, 1), 140);
  const int level = dark_class_level(h, 2);
  EXPECT_GE(level, 30);
  EXPECT_LT(level, 140);
  EXPECT_THROW(dark_class_level(h, 0), InvalidArgument);
}

TEST(Binarize, DarkIsForeground) {
  GrayImage img(3, 1);
  img(0, 0) = 10 / 255.0;
  img(0, 1) = 50 / 255.0;
  img(0, 2) = 51 / 255.0;
  const BinaryMask m = binarize_dark(img, 50);
  EXPECT_EQ(m(0, 0), 1);
  EXPECT_EQ(m(0, 1), 1);
  EXPECT_EQ(m(0, 2), 0);
}

TEST(Label, AllThreeByThreeMasksMatchFloodFill) {
  for (int bits = 0; bits < 512; ++bits) {
    BinaryMask m(3, 3, 0);
    for (int i = 0; i < 9; ++i) m[static_cast<std::size_t>(i)] = (bits >> i) & 1;
    const Labeling got = label_8conn(m, 0);
    const auto want = oracle::flood_fill(m, 0);
    ASSERT_EQ(got.regions.size(), want.size()) << bits;
    for (std::size_t k = 0; k < want.size(); ++k)
      for (auto [r, c] : want[k].pixels) EXPECT_EQ(got.labels(r, c), static_cast<int>(k + 1)) << bits;
  }
}

TEST(Label, RandomMasksWithMarginMatchFloodFill) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const int w = 20 + static_cast<int>(rng() % 50), h = 20 + static_cast<int>(rng() % 50);
    BinaryMask m(w, h, 0);
    for (auto& px : m.pixels()) px = rng() % 100 < 35 ? 1 : 0;
    const int margin = trial % 5;
    const Labeling got = label_8conn(m, margin);
    const auto want = oracle::flood_fill(m, margin);
    ASSERT_EQ(got.regions.size(), want.size());
    LabelMap expect(w, h, 0);
    for (std::size_t k = 0; k < want.size(); ++k) {
      for (auto [r, c] : want[k].pixels) expect(r, c) = static_cast<int>(k + 1);
      EXPECT_EQ(got.regions[k].pixel_count, want[k].pixels.size());
      EXPECT_EQ(got.regions[k].bbox, (Rect{want[k].row_min, want[k].row_max, want[k].col_min, want[k].col_max}));
    }
    EXPECT_EQ(got.labels, expect);
  }
}

TEST(Label, DiagonalPixelsAreOneComponent) {
  BinaryMask m(4, 4, 0);
  for (int i = 0; i < 4; ++i) m(i, i) = 1;
  EXPECT_EQ(label_8conn(m, 0).regions.size(), 1u);
}

TEST(Label, MarginDropsOnlyComponentsInsideTheBand) {
  BinaryMask m(40, 40, 0);
  m(1, 20) = m(2, 20) = 1;          // inside top band
  for (int r = 3; r < 15; ++r) m(r, 12) = 1;  // starts in the band, reaches inward
  m(20, 20) = 1;                    // interior
  const Labeling l = label_8conn(m, 8);
  ASSERT_EQ(l.regions.size(), 2u);
  EXPECT_EQ(l.labels(1, 20), 0);
  EXPECT_EQ(l.regions[0].bbox.col_min, 12);
  BinaryMask side(40, 40, 0);
  for (int r = 3; r < 35; ++r) side(r, 5) = 1;  // long but entirely in the left band
  EXPECT_TRUE(label_8conn(side, 8).regions.empty());
  EXPECT_THROW(label_8conn(m, 20), InvalidArgument);
}

TEST(Label, MidpointIsBoundingBoxCenter) {
  BinaryMask m(10, 10, 0);
  m(2, 3) = m(5, 3) = m(3, 3) = m(4, 4) = 1;
  const Labeling l = label_8conn(m, 0);
  ASSERT_EQ(l.regions.size(), 1u);
  EXPECT_DOUBLE_EQ(l.regions[0].midpoint.row, 3.5);
  EXPECT_DOUBLE_EQ(l.regions[0].midpoint.col, 3.5);
}

TEST(Merge, MatchesTransitiveClosure) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> coord(0.0, 400.0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Region> regions;
    std::vector<PointRC> pts;
    const int n = 1 + trial % 25;
    for (int i = 0; i < n; ++i) {
      const PointRC p{coord(rng), coord(rng)};
      regions.push_back({i + 1, 1, Rect{}, p});
      pts.push_back(p);
    }
    const auto groups = merge_nuclei(regions, 60.0);
    const auto cls = oracle::closure_classes(pts, 60.0);
    std::vector<int> group_of(static_cast<std::size_t>(n), -1);
    for (const NucleusGroup& g : groups)
      for (int label : g.member_labels) group_of[static_cast<std::size_t>(label - 1)] = g.group_id;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) EXPECT_EQ(cls[i] == cls[j], group_of[i] == group_of[j]);
  }
}

TEST(Merge, ChainMergesTransitively) {
  std::vector<Region> regions{{1, 1, {}, {0, 0}}, {2, 1, {}, {0, 50}}, {3, 1, {}, {0, 100}}, {4, 1, {}, {0, 200}}};
  const auto groups = merge_nuclei(regions, 60.0);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].member_labels, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(groups[0].search_window, (Rect{0, 0, 0, 100}));
  EXPECT_EQ(groups[1].group_id, 2);
  EXPECT_THROW(merge_nuclei(regions, 0.0), InvalidArgument);
}

TEST(SearchWindow, PadsAndClips) {
  NucleusGroup g{1, {1, 2}, {{10.5, 20.0}, {30.0, 41.5}}, {}};
  EXPECT_EQ(search_window(g, 5, Rect{0, 99, 0, 99}), (Rect{5, 35, 15, 47}));
  EXPECT_EQ(search_window(g, 60, Rect{0, 99, 0, 99}), (Rect{0, 90, 0, 99}));
}

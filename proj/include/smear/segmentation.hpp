#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "smear/error.hpp"
#include "smear/raster.hpp"

namespace smear {

/// Union-find with path halving and union by rank.
class DisjointSet {
public:
  explicit DisjointSet(std::size_t n = 0) { reset(n); }

  void reset(std::size_t n) {
    parent_.resize(n);
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    rank_.assign(n, 0);
  }
  std::size_t add() {
    parent_.push_back(parent_.size());
    rank_.push_back(0);
    return parent_.size() - 1;
  }
  std::size_t size() const noexcept { return parent_.size(); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return a;
  }

private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

/// Otsu's threshold: the level t maximizing w0*w1*(mu0-mu1)^2 where class 0
/// holds bins <= t. Ties resolve to the smallest t. A histogram with a single
/// occupied bin returns that bin.
inline int otsu_level(const Histogram& hist) {
  double total = 0.0, weighted = 0.0;
  for (int k = 0; k < 256; ++k) {
    total += static_cast<double>(hist[k]);
    weighted += static_cast<double>(k) * static_cast<double>(hist[k]);
  }
  if (total == 0.0) throw DegenerateError("otsu_level: histogram is empty");

  // w0*w1*(mu0-mu1)^2 == (N*S0 - n0*S)^2 / (N^2 * n0 * n1); N^2 is constant.
  int best = -1;
  double best_score = -1.0;
  double n0 = 0.0, s0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    n0 += static_cast<double>(hist[t]);
    s0 += static_cast<double>(t) * static_cast<double>(hist[t]);
    const double n1 = total - n0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    const double diff = total * s0 - n0 * weighted;
    const double score = diff * diff / (n0 * n1);
    if (score > best_score) {
      best_score = score;
      best = t;
    }
  }
  if (best < 0) {
    for (int k = 0; k < 256; ++k)
      if (hist[k] != 0) return k;
  }
  return best;
}

/// Repeated Otsu on the dark class: each pass re-thresholds the histogram
/// restricted to bins at or below the previous level. One pass is plain Otsu.
inline int dark_class_level(const Histogram& hist, int passes) {
  if (passes < 1) throw InvalidArgument("dark_class_level: passes must be >= 1");
  Histogram h = hist;
  int level = otsu_level(h);
  for (int pass = 1; pass < passes; ++pass) {
    std::fill(h.begin() + level + 1, h.end(), std::size_t{0});
    level = otsu_level(h);
  }
  return level;
}

/// Foreground where the 8-bit level is <= `level`.
inline BinaryMask binarize_dark(const GrayImage& img, int level) {
  BinaryMask m(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) m[i] = quantize(img[i]) <= level ? 1 : 0;
  return m;
}

struct Region {
  int label = 0;
  std::size_t pixel_count = 0;
  Rect bbox;
  PointRC midpoint;  // center of the bounding box
};

struct Labeling {
  LabelMap labels;
  std::vector<Region> regions;  // regions[k].label == k + 1
};

/// 8-connected component labeling. Components whose bounding box lies
/// entirely inside the `margin_px` band along one image border are dropped.
/// Surviving labels are 1..K in raster order of each component's first pixel.
inline Labeling label_8conn(const BinaryMask& mask, int margin_px) {
  const int w = mask.width(), h = mask.height();
  if (margin_px < 0 || 2 * margin_px >= std::min(w, h))
    throw InvalidArgument("label_8conn: margin_px " + std::to_string(margin_px) + " must be < min(width, height)/2");

  LabelMap provisional(w, h, 0);
  DisjointSet sets;
  sets.add();  // slot 0 is background
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask(r, c)) continue;
      int label = 0;
      // Already-visited neighbors: W, NW, N, NE.
      const int nbr[4][2] = {{0, -1}, {-1, -1}, {-1, 0}, {-1, 1}};
      for (const auto& d : nbr) {
        const int rr = r + d[0], cc = c + d[1];
        if (!mask.contains(rr, cc) || !mask(rr, cc)) continue;
        const int other = provisional(rr, cc);
        if (label == 0)
          label = other;
        else if (other != label)
          sets.unite(static_cast<std::size_t>(label), static_cast<std::size_t>(other));
      }
      provisional(r, c) = label != 0 ? label : static_cast<int>(sets.add());
    }
  }

  // Canonical numbering: raster order of first pixel, after margin pruning.
  const std::size_t n = sets.size();
  std::vector<Rect> box(n, Rect{h, -1, w, -1});
  std::vector<std::size_t> count(n, 0);
  std::vector<std::size_t> first(n, static_cast<std::size_t>(-1));
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const int p = provisional(r, c);
      if (p == 0) continue;
      const std::size_t root = sets.find(static_cast<std::size_t>(p));
      provisional(r, c) = static_cast<int>(root);
      Rect& b = box[root];
      b.row_min = std::min(b.row_min, r);
      b.row_max = std::max(b.row_max, r);
      b.col_min = std::min(b.col_min, c);
      b.col_max = std::max(b.col_max, c);
      if (count[root]++ == 0) first[root] = static_cast<std::size_t>(r) * w + c;
    }

  auto in_margin = [&](const Rect& b) {
    return b.row_max < margin_px || b.row_min >= h - margin_px || b.col_max < margin_px || b.col_min >= w - margin_px;
  };
  std::vector<std::size_t> roots;
  for (std::size_t root = 1; root < n; ++root)
    if (count[root] > 0 && !in_margin(box[root])) roots.push_back(root);
  std::sort(roots.begin(), roots.end(), [&](std::size_t a, std::size_t b) { return first[a] < first[b]; });

  std::vector<int> final_label(n, 0);
  Labeling out{LabelMap(w, h, 0), {}};
  out.regions.reserve(roots.size());
  for (std::size_t k = 0; k < roots.size(); ++k) {
    const std::size_t root = roots[k];
    final_label[root] = static_cast<int>(k + 1);
    const Rect& b = box[root];
    out.regions.push_back({static_cast<int>(k + 1), count[root], b,
                           {(b.row_min + b.row_max) / 2.0, (b.col_min + b.col_max) / 2.0}});
  }
  for (std::size_t i = 0; i < provisional.size(); ++i)
    out.labels[i] = provisional[i] == 0 ? 0 : final_label[static_cast<std::size_t>(provisional[i])];
  return out;
}

struct NucleusGroup {
  int group_id = 0;
  std::vector<int> member_labels;  // ascending
  std::vector<PointRC> midpoints;  // parallel to member_labels
  Rect search_window;
};

/// Smallest integer rect holding every midpoint of the group, grown by `pad`
/// on each side and clipped to `bounds`.
inline Rect search_window(const NucleusGroup& group, int pad, const Rect& bounds) {
  if (group.midpoints.empty()) throw InvalidArgument("search_window: group has no midpoints");
  double rmin = group.midpoints[0].row, rmax = rmin, cmin = group.midpoints[0].col, cmax = cmin;
  for (const PointRC& p : group.midpoints) {
    rmin = std::min(rmin, p.row);
    rmax = std::max(rmax, p.row);
    cmin = std::min(cmin, p.col);
    cmax = std::max(cmax, p.col);
  }
  const Rect raw{static_cast<int>(std::floor(rmin)) - pad, static_cast<int>(std::ceil(rmax)) + pad,
                 static_cast<int>(std::floor(cmin)) - pad, static_cast<int>(std::ceil(cmax)) + pad};
  return raw.clipped_to(bounds);
}

/// Groups regions whose midpoints are within `merge_dist` (Euclidean),
/// closed transitively. Groups are numbered by their smallest member label;
/// each search_window is the unpadded midpoint bounding box.
inline std::vector<NucleusGroup> merge_nuclei(const std::vector<Region>& regions, double merge_dist) {
  if (!(merge_dist > 0.0)) throw InvalidArgument("merge_nuclei: merge_dist must be positive");
  DisjointSet sets(regions.size());
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (std::size_t j = i + 1; j < regions.size(); ++j)
      if (distance(regions[i].midpoint, regions[j].midpoint) <= merge_dist) sets.unite(i, j);

  std::vector<std::size_t> order(regions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return regions[a].label < regions[b].label; });

  std::vector<NucleusGroup> groups;
  std::vector<int> group_of_root(regions.size(), -1);
  for (std::size_t i : order) {
    const std::size_t root = sets.find(i);
    if (group_of_root[root] < 0) {
      group_of_root[root] = static_cast<int>(groups.size());
      groups.push_back({static_cast<int>(groups.size() + 1), {}, {}, {}});
    }
    NucleusGroup& g = groups[static_cast<std::size_t>(group_of_root[root])];
    g.member_labels.push_back(regions[i].label);
    g.midpoints.push_back(regions[i].midpoint);
  }
  const Rect unbounded{std::numeric_limits<int>::min() / 2, std::numeric_limits<int>::max() / 2,
                       std::numeric_limits<int>::min() / 2, std::numeric_limits<int>::max() / 2};
  for (NucleusGroup& g : groups) g.search_window = search_window(g, 0, unbounded);
  return groups;
}

}  // namespace smear

#pragma once

// White-cell localization: fixed-radius circle Hough inside per-nucleus
// search windows, fake-region rejection, cytoplasm and white-cell removal.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "smear/error.hpp"
#include "smear/raster.hpp"
#include "smear/segmentation.hpp"

namespace smear {

struct HoughParams {
  int radius = 60;
  double min_vote_fraction = 0.4;  // of round(2*pi*radius)

  void validate() const {
    if (radius < 1) throw InvalidArgument("hough radius must be >= 1");
    if (!(min_vote_fraction > 0.0 && min_vote_fraction <= 1.0))
      throw InvalidArgument("hough min_vote_fraction must lie in (0, 1]");
  }
  /// Minimum accumulator value for a center to count as a cell.
  double vote_floor() const { return min_vote_fraction * std::round(2.0 * std::numbers::pi * radius); }
};

struct HoughPeak {
  PointRC center;
  int votes = 0;
};

struct WhiteCell {
  PointRC center;
  int radius = 0;
  int votes = 0;
  int group_id = 0;
};

struct WhiteCellDetection {
  std::vector<WhiteCell> accepted;
  std::vector<int> rejected_group_ids;
  std::vector<int> group_max_votes;  // accumulator maximum per input group
};

/// Offsets (dr, dc) with (radius-1)^2 <= dr^2 + dc^2 <= (radius+1)^2.
inline std::vector<std::pair<int, int>> annulus_offsets(int radius) {
  const int lo = std::max(0, radius - 1), hi = radius + 1;
  std::vector<std::pair<int, int>> out;
  for (int dr = -hi; dr <= hi; ++dr)
    for (int dc = -hi; dc <= hi; ++dc) {
      const int d2 = dr * dr + dc * dc;
      if (d2 >= lo * lo && d2 <= hi * hi) out.emplace_back(dr, dc);
    }
  return out;
}

/// Vote counts for every candidate center inside `window`. Each edge pixel
/// votes for all centers whose distance from it lies in [radius-1, radius+1].
inline Raster<int> hough_accumulator(const BinaryMask& edges, const Rect& window, const HoughParams& p) {
  p.validate();
  if (!window.inside(edges.width(), edges.height())) throw BoundsError("hough window outside edge image");
  Raster<int> acc(window.width(), window.height(), 0);
  const auto offsets = annulus_offsets(p.radius);
  const int reach = p.radius + 1;
  const Rect voters =
      Rect{window.row_min - reach, window.row_max + reach, window.col_min - reach, window.col_max + reach}.clipped_to(
          bounds_of(edges));
  for (int er = voters.row_min; er <= voters.row_max; ++er)
    for (int ec = voters.col_min; ec <= voters.col_max; ++ec) {
      if (!edges(er, ec)) continue;
      for (const auto& [dr, dc] : offsets) {
        const int cr = er + dr, cc = ec + dc;
        if (window.contains(cr, cc)) ++acc(cr - window.row_min, cc - window.col_min);
      }
    }
  return acc;
}

/// Maximum of an accumulator over `window` (first in raster order among
/// equal maxima), mapped back to image coordinates.
inline HoughPeak accumulator_peak(const Raster<int>& acc, const Rect& window) {
  const auto best = std::max_element(acc.pixels().begin(), acc.pixels().end());
  const auto idx = static_cast<int>(best - acc.pixels().begin());
  return {{static_cast<double>(window.row_min + idx / acc.width()), static_cast<double>(window.col_min + idx % acc.width())},
          *best};
}

/// Best center in `window` and its votes; empty when the maximum falls
/// below the vote floor.
inline std::optional<HoughPeak> hough_circle_center(const BinaryMask& edges, const Rect& window, const HoughParams& p) {
  const HoughPeak peak = accumulator_peak(hough_accumulator(edges, window, p), window);
  if (peak.votes <= 0 || peak.votes < p.vote_floor()) return std::nullopt;
  return peak;
}

inline WhiteCellDetection detect_white_cells(const std::vector<NucleusGroup>& groups, const BinaryMask& edges,
                                             const HoughParams& p) {
  WhiteCellDetection out;
  for (const NucleusGroup& g : groups) {
    const HoughPeak peak = accumulator_peak(hough_accumulator(edges, g.search_window, p), g.search_window);
    out.group_max_votes.push_back(peak.votes);
    if (peak.votes <= 0 || peak.votes < p.vote_floor())
      out.rejected_group_ids.push_back(g.group_id);
    else
      out.accepted.push_back({peak.center, p.radius, peak.votes, g.group_id});
  }
  return out;
}

/// Pixels within `radius` of some accepted cell center.
inline BinaryMask disc_mask(const std::vector<WhiteCell>& cells, int width, int height) {
  BinaryMask m(width, height, 0);
  for (const WhiteCell& cell : cells) {
    const double r2 = static_cast<double>(cell.radius) * cell.radius;
    const int r0 = std::max(0, static_cast<int>(std::floor(cell.center.row - cell.radius)));
    const int r1 = std::min(height - 1, static_cast<int>(std::ceil(cell.center.row + cell.radius)));
    const int c0 = std::max(0, static_cast<int>(std::floor(cell.center.col - cell.radius)));
    const int c1 = std::min(width - 1, static_cast<int>(std::ceil(cell.center.col + cell.radius)));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) {
        const double dr = r - cell.center.row, dc = c - cell.center.col;
        if (dr * dr + dc * dc <= r2) m(r, c) = 1;
      }
  }
  return m;
}

inline BinaryMask cytoplasm_mask(const std::vector<WhiteCell>& cells, const BinaryMask& nucleus_mask) {
  BinaryMask m = disc_mask(cells, nucleus_mask.width(), nucleus_mask.height());
  for (std::size_t i = 0; i < m.size(); ++i)
    if (nucleus_mask[i]) m[i] = 0;
  return m;
}

/// Replaces every pixel inside an accepted disc with the (lower) median of
/// the pixels outside all discs.
inline GrayImage remove_white_cells(const GrayImage& img, const std::vector<WhiteCell>& cells) {
  if (cells.empty()) return img;
  const BinaryMask discs = disc_mask(cells, img.width(), img.height());
  std::vector<double> outside;
  outside.reserve(img.size());
  for (std::size_t i = 0; i < img.size(); ++i)
    if (!discs[i]) outside.push_back(img[i]);
  if (outside.empty()) throw DegenerateError("remove_white_cells: discs cover the whole image, no fill value");
  const auto mid = outside.begin() + static_cast<std::ptrdiff_t>((outside.size() - 1) / 2);
  std::nth_element(outside.begin(), mid, outside.end());
  const double fill = *mid;
  GrayImage out = img;
  for (std::size_t i = 0; i < img.size(); ++i)
    if (discs[i]) out[i] = fill;
  return out;
}

}  // namespace smear

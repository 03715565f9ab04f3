#pragma once

// Red-cell counting by template correlation: zero-mean normalized
// cross-correlation per template, weighted combination of the score maps,
// and peak-area shrinking to one center per cell.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "smear/canny.hpp"  // quantile_of
#include "smear/error.hpp"
#include "smear/raster.hpp"
#include "smear/segmentation.hpp"

namespace smear {

struct ScoreTag;
using CorrelationMap = Raster<double, ScoreTag>;

struct TemplateSpec {
  std::string id;
  Rect rect;
  double weight = 1.0;
};

struct Template {
  std::string id;
  Rect rect;  // in source-image coordinates
  double weight = 1.0;
  GrayImage patch;
};

struct PeakParams {
  double threshold_quantile = 0.99;
  // Unset means half the narrowest template width.
  std::optional<double> min_peak_separation;

  void validate() const {
    if (!(threshold_quantile > 0.0 && threshold_quantile < 1.0))
      throw InvalidArgument("peak threshold_quantile must lie in (0, 1)");
    if (min_peak_separation && !(*min_peak_separation >= 1.0))
      throw InvalidArgument("peak min_peak_separation must be >= 1");
  }
  double separation_for(const std::vector<Template>& templates) const {
    if (min_peak_separation) return *min_peak_separation;
    int narrowest = 0;
    for (const Template& t : templates) narrowest = narrowest == 0 ? t.rect.width() : std::min(narrowest, t.rect.width());
    return std::max(1.0, narrowest / 2.0);
  }
};

struct Peak {
  PointRC center;
  double score = 0.0;
};

namespace detail {

inline double patch_variance(const GrayImage& patch) {
  const double mean = std::accumulate(patch.pixels().begin(), patch.pixels().end(), 0.0) / static_cast<double>(patch.size());
  double ss = 0.0;
  for (double v : patch.pixels()) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(patch.size());
}

// Summed-area table with a zero first row/column.
class Integral {
public:
  template <class Tag>
  Integral(const Raster<double, Tag>& src, bool squared) : w_(src.width() + 1), sums_((src.width() + 1) * (src.height() + 1), 0.0) {
    for (int r = 0; r < src.height(); ++r) {
      double row_sum = 0.0;
      for (int c = 0; c < src.width(); ++c) {
        const double v = squared ? src(r, c) * src(r, c) : src(r, c);
        row_sum += v;
        at(r + 1, c + 1) = at(r, c + 1) + row_sum;
      }
    }
  }
  // Inclusive-exclusive box [r0, r1) x [c0, c1).
  double box(int r0, int r1, int c0, int c1) const { return at(r1, c1) - at(r0, c1) - at(r1, c0) + at(r0, c0); }

private:
  double& at(int r, int c) { return sums_[static_cast<std::size_t>(r) * w_ + c]; }
  double at(int r, int c) const { return sums_[static_cast<std::size_t>(r) * w_ + c]; }
  int w_;
  std::vector<double> sums_;
};

}  // namespace detail

inline std::vector<Template> extract_templates(const GrayImage& img, const std::vector<TemplateSpec>& specs) {
  std::vector<Template> out;
  out.reserve(specs.size());
  for (const TemplateSpec& s : specs) {
    if (!(s.weight > 0.0)) throw InvalidArgument("template '" + s.id + "' needs a positive weight");
    if (!s.rect.inside(img.width(), img.height())) throw BoundsError("template '" + s.id + "' rect lies outside the image");
    GrayImage patch = crop(img, s.rect);
    if (!(detail::patch_variance(patch) > 1e-12))
      throw DegenerateError("template '" + s.id + "' is constant; normalized correlation is undefined");
    out.push_back({s.id, s.rect, s.weight, std::move(patch)});
  }
  return out;
}

/// Convenience form with ids "1", "2", ...
inline std::vector<Template> extract_templates(const GrayImage& img, const std::vector<Rect>& rects,
                                               const std::vector<double>& weights) {
  if (rects.size() != weights.size()) throw DimensionError("extract_templates: one weight per rect required");
  std::vector<TemplateSpec> specs;
  for (std::size_t i = 0; i < rects.size(); ++i) specs.push_back({std::to_string(i + 1), rects[i], weights[i]});
  return extract_templates(img, specs);
}

/// Zero-mean normalized cross-correlation with the template anchored at its
/// center (height/2, width/2). Each output pixel is computed over the part
/// of the template that overlaps the image; windows with no variance score 0.
inline CorrelationMap ncc_map(const GrayImage& img, const GrayImage& patch) {
  const int W = img.width(), H = img.height(), tw = patch.width(), th = patch.height();
  if (tw >= W || th >= H)
    throw DimensionError("ncc_map: template " + std::to_string(tw) + "x" + std::to_string(th) +
                         " must be smaller than image " + std::to_string(W) + "x" + std::to_string(H));
  const int ar = th / 2, ac = tw / 2;

  // NCC is invariant to constant offsets; centering both inputs first keeps
  // the running sums small.
  const double img_mean = std::accumulate(img.pixels().begin(), img.pixels().end(), 0.0) / static_cast<double>(img.size());
  const double tpl_mean =
      std::accumulate(patch.pixels().begin(), patch.pixels().end(), 0.0) / static_cast<double>(patch.size());
  Raster<double> I(W, H), T(tw, th);
  for (std::size_t i = 0; i < img.size(); ++i) I[i] = img[i] - img_mean;
  for (std::size_t i = 0; i < patch.size(); ++i) T[i] = patch[i] - tpl_mean;

  // Cross term over the zero-padded image: acc(r, c) = sum I(r-ar+tr, c-ac+tc) T(tr, tc).
  Raster<double> cross(W, H, 0.0);
  for (int tr = 0; tr < th; ++tr)
    for (int r = 0; r < H; ++r) {
      const int y = r - ar + tr;
      if (y < 0 || y >= H) continue;
      const double* src = I.row(y).data();
      double* dst = cross.row(r).data();
      for (int tc = 0; tc < tw; ++tc) {
        const double t = T(tr, tc);
        const int off = tc - ac;
        const int c0 = std::max(0, -off), c1 = std::min(W, W - off);
        for (int c = c0; c < c1; ++c) dst[c] += t * src[c + off];
      }
    }

  const detail::Integral sI(I, false), sI2(I, true), sT(T, false), sT2(T, true);
  CorrelationMap out(W, H, 0.0);
  for (int r = 0; r < H; ++r) {
    const int y0 = std::max(0, r - ar), y1 = std::min(H, r - ar + th);
    const int ty0 = y0 - (r - ar), ty1 = y1 - (r - ar);
    for (int c = 0; c < W; ++c) {
      const int x0 = std::max(0, c - ac), x1 = std::min(W, c - ac + tw);
      const int tx0 = x0 - (c - ac), tx1 = x1 - (c - ac);
      const double n = static_cast<double>((y1 - y0) * (x1 - x0));
      const double si = sI.box(y0, y1, x0, x1), st = sT.box(ty0, ty1, tx0, tx1);
      const double var_i = sI2.box(y0, y1, x0, x1) - si * si / n;
      const double var_t = sT2.box(ty0, ty1, tx0, tx1) - st * st / n;
      // Cancellation leaves ~1e-12 residue on flat windows; one 8-bit step
      // already contributes ~1.5e-5.
      const double floor = 1e-10 * n;
      if (var_i <= floor || var_t <= floor) continue;
      const double score = (cross(r, c) - si * st / n) / std::sqrt(var_i * var_t);
      out(r, c) = std::clamp(score, -1.0, 1.0);
    }
  }
  return out;
}

inline CorrelationMap ncc_map(const GrayImage& img, const Template& t) { return ncc_map(img, t.patch); }

/// Pixelwise sum of weights[i] * maps[i].
inline CorrelationMap combine_maps(const std::vector<CorrelationMap>& maps, const std::vector<double>& weights) {
  if (maps.empty()) throw DimensionError("combine_maps: no maps");
  if (maps.size() != weights.size())
    throw DimensionError("combine_maps: " + std::to_string(maps.size()) + " maps but " + std::to_string(weights.size()) +
                         " weights");
  CorrelationMap out(maps[0].width(), maps[0].height(), 0.0);
  for (std::size_t k = 0; k < maps.size(); ++k) {
    if (!maps[k].same_shape(out)) throw DimensionError("combine_maps: map dimensions differ");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[k] * maps[k][i];
  }
  return out;
}

/// Peak areas -> single centers: quantile threshold, per-area maximum set,
/// mean position of each connected maximum set, then merging of centers
/// closer than the separation (higher score wins, equal scores average).
/// A flat map carries no location and yields no peaks.
inline std::vector<Peak> peak_regions(const CorrelationMap& map, const PeakParams& p) {
  p.validate();
  const double separation = p.min_peak_separation.value_or(1.0);
  const int w = map.width(), h = map.height();
  const double threshold = quantile_of(std::vector<double>(map.pixels().begin(), map.pixels().end()), p.threshold_quantile);

  BinaryMask kept(w, h, 0);
  for (std::size_t i = 0; i < map.size(); ++i) kept[i] = map[i] >= threshold ? 1 : 0;
  const Labeling areas = label_8conn(kept, 0);

  std::vector<double> area_max(areas.regions.size() + 1, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < map.size(); ++i)
    if (const int l = areas.labels[i]) area_max[l] = std::max(area_max[l], map[i]);

  BinaryMask shrunk(w, h, 0);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const int l = areas.labels[i];
    if (l != 0 && map[i] >= area_max[l] - 1e-9) shrunk[i] = 1;
  }
  if (count_foreground(shrunk) == map.size()) return {};
  const Labeling tops = label_8conn(shrunk, 0);

  std::vector<double> sum_r(tops.regions.size() + 1, 0.0), sum_c(tops.regions.size() + 1, 0.0);
  std::vector<double> best(tops.regions.size() + 1, -std::numeric_limits<double>::infinity());
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (const int l = tops.labels(r, c)) {
        sum_r[l] += r;
        sum_c[l] += c;
        best[l] = std::max(best[l], map(r, c));
      }

  struct Candidate {
    Peak peak;
    int merged = 1;
  };
  std::vector<Candidate> candidates;
  for (const Region& reg : tops.regions) {
    const double n = static_cast<double>(reg.pixel_count);
    candidates.push_back({{{sum_r[reg.label] / n, sum_c[reg.label] / n}, best[reg.label]}});
  }

  // Stable sort keeps raster order among equal scores.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.peak.score > b.peak.score; });
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Candidate> merged;
    for (const Candidate& cand : candidates) {
      auto near = std::find_if(merged.begin(), merged.end(), [&](const Candidate& k) {
        return distance(k.peak.center, cand.peak.center) < separation;
      });
      if (near == merged.end()) {
        merged.push_back(cand);
        continue;
      }
      changed = true;
      if (std::abs(near->peak.score - cand.peak.score) <= 1e-12) {
        const double total = near->merged + cand.merged;
        near->peak.center.row = (near->peak.center.row * near->merged + cand.peak.center.row * cand.merged) / total;
        near->peak.center.col = (near->peak.center.col * near->merged + cand.peak.center.col * cand.merged) / total;
        near->merged += cand.merged;
      }
    }
    candidates = std::move(merged);
  }

  std::vector<Peak> out;
  for (const Candidate& c : candidates) out.push_back(c.peak);
  std::sort(out.begin(), out.end(), [](const Peak& a, const Peak& b) {
    return a.center.row != b.center.row ? a.center.row < b.center.row : a.center.col < b.center.col;
  });
  return out;
}

struct RedCellCount {
  std::size_t count = 0;
  std::vector<Peak> peaks;
  std::vector<CorrelationMap> maps;  // one per template
  std::optional<CorrelationMap> combined;
};

inline RedCellCount count_red_cells(const GrayImage& img, const std::vector<Template>& templates, const PeakParams& p) {
  RedCellCount out;
  if (templates.empty()) return out;
  std::vector<double> weights;
  for (const Template& t : templates) {
    out.maps.push_back(ncc_map(img, t));
    weights.push_back(t.weight);
  }
  out.combined = combine_maps(out.maps, weights);
  PeakParams resolved = p;
  resolved.min_peak_separation = p.separation_for(templates);
  out.peaks = peak_regions(*out.combined, resolved);
  out.count = out.peaks.size();
  return out;
}

/// Size of a one-to-one greedy matching (closest pairs first) between two
/// point sets, pairing only points within `radius`.
inline std::size_t match_count(const std::vector<PointRC>& a, const std::vector<PointRC>& b, double radius) {
  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (const double d = distance(a[i], b[j]); d <= radius) pairs.push_back({d, i, j});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.d < y.d; });
  std::vector<bool> used_a(a.size()), used_b(b.size());
  std::size_t matched = 0;
  for (const Pair& p : pairs)
    if (!used_a[p.i] && !used_b[p.j]) {
      used_a[p.i] = used_b[p.j] = true;
      ++matched;
    }
  return matched;
}

struct TuneEntry {
  std::vector<double> weights;
  std::size_t detected = 0;
  std::size_t count_error = 0;
  std::size_t unmatched = 0;  // truth + detections left without a partner
};

struct TuneResult {
  std::size_t best_index = 0;
  std::vector<TuneEntry> entries;
  const std::vector<double>& best_weights() const { return entries[best_index].weights; }
};

inline constexpr double kTuneMatchRadius = 10.0;

/// Grid search over weight vectors: fewest count errors, then fewest
/// unmatched centers, then earliest grid entry.
inline TuneResult tune_weights(const std::vector<CorrelationMap>& maps, const std::vector<PointRC>& truth,
                               const std::vector<std::vector<double>>& grid, const PeakParams& p) {
  if (grid.empty()) throw InvalidArgument("tune_weights: empty grid");
  TuneResult out;
  for (const auto& weights : grid) {
    const std::vector<Peak> peaks = peak_regions(combine_maps(maps, weights), p);
    std::vector<PointRC> centers;
    for (const Peak& pk : peaks) centers.push_back(pk.center);
    const std::size_t matched = match_count(truth, centers, kTuneMatchRadius);
    TuneEntry e{weights, centers.size(),
                centers.size() > truth.size() ? centers.size() - truth.size() : truth.size() - centers.size(),
                truth.size() + centers.size() - 2 * matched};
    out.entries.push_back(std::move(e));
  }
  for (std::size_t i = 1; i < out.entries.size(); ++i) {
    const TuneEntry& a = out.entries[i];
    const TuneEntry& b = out.entries[out.best_index];
    if (a.count_error < b.count_error || (a.count_error == b.count_error && a.unmatched < b.unmatched)) out.best_index = i;
  }
  return out;
}

}  // namespace smear

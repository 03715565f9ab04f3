#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "smear/error.hpp"
#include "smear/raster.hpp"

namespace smear {

struct CannyParams {
  double gauss_sigma = 1.4;
  double high_quantile = 0.90;  // of nonzero gradient magnitudes
  double low_ratio = 0.4;       // low threshold = low_ratio * high

  void validate() const {
    if (!(gauss_sigma > 0.0)) throw InvalidArgument("canny sigma must be > 0");
    if (!(high_quantile > 0.0 && high_quantile < 1.0)) throw InvalidArgument("canny high_quantile must lie in (0, 1)");
    if (!(low_ratio > 0.0 && low_ratio < 1.0)) throw InvalidArgument("canny low_ratio must lie in (0, 1)");
  }
};

/// Magnitudes below this are treated as zero gradient (float residue of
/// smoothing a flat area).
inline constexpr double kGradientFloor = 1e-9;

struct Gradient {
  Raster<double> magnitude;
  Raster<double> gx;  // along columns
  Raster<double> gy;  // along rows
};

/// Separable Gaussian blur with replicated borders, kernel radius ceil(3 sigma).
inline Raster<double> gaussian_blur(const GrayImage& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) sum += kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
  for (double& k : kernel) k /= sum;

  const int w = img.width(), h = img.height();
  Raster<double> tmp(w, h), out(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * img(r, std::clamp(c + k, 0, w - 1));
      tmp(r, c) = acc;
    }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp(std::clamp(r + k, 0, h - 1), c);
      out(r, c) = acc;
    }
  return out;
}

/// Sobel gradient of the Gaussian-smoothed image.
inline Gradient smoothed_gradient(const GrayImage& img, double sigma) {
  const Raster<double> s = gaussian_blur(img, sigma);
  const int w = img.width(), h = img.height();
  Gradient g{Raster<double>(w, h), Raster<double>(w, h), Raster<double>(w, h)};
  auto at = [&](int r, int c) { return s(std::clamp(r, 0, h - 1), std::clamp(c, 0, w - 1)); };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double gx = (at(r - 1, c + 1) + 2 * at(r, c + 1) + at(r + 1, c + 1)) -
                        (at(r - 1, c - 1) + 2 * at(r, c - 1) + at(r + 1, c - 1));
      const double gy = (at(r + 1, c - 1) + 2 * at(r + 1, c) + at(r + 1, c + 1)) -
                        (at(r - 1, c - 1) + 2 * at(r - 1, c) + at(r - 1, c + 1));
      g.gx(r, c) = gx;
      g.gy(r, c) = gy;
      const double m = std::hypot(gx, gy);
      g.magnitude(r, c) = m > kGradientFloor ? m : 0.0;
    }
  return g;
}

/// Lower quantile: the value at sorted index floor(q * (n - 1)).
inline double quantile_of(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(values.size() - 1)));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

struct CannyThresholds {
  double low = 0.0;
  double high = 0.0;
};

inline CannyThresholds canny_thresholds(const Raster<double>& magnitude, const CannyParams& p) {
  std::vector<double> nonzero;
  for (double m : magnitude.pixels())
    if (m > 0.0) nonzero.push_back(m);
  const double high = quantile_of(std::move(nonzero), p.high_quantile);
  return {p.low_ratio * high, high};
}

/// Standard Canny: Gaussian smoothing, Sobel gradient, non-maximum
/// suppression over four quantized directions, 8-connected hysteresis.
/// The one-pixel image border never holds edges.
inline BinaryMask canny(const GrayImage& img, const CannyParams& p) {
  p.validate();
  const int w = img.width(), h = img.height();
  BinaryMask edges(w, h, 0);
  const Gradient g = smoothed_gradient(img, p.gauss_sigma);
  const CannyThresholds th = canny_thresholds(g.magnitude, p);
  if (!(th.high > 0.0)) return edges;

  // Thin: keep strict maximum against the "before" neighbor and a non-strict
  // one against the "after" neighbor, so two-pixel plateaus keep one pixel.
  Raster<double> thin(w, h, 0.0);
  for (int r = 1; r < h - 1; ++r)
    for (int c = 1; c < w - 1; ++c) {
      const double m = g.magnitude(r, c);
      if (m <= 0.0) continue;
      double angle = std::atan2(g.gy(r, c), g.gx(r, c)) * 180.0 / std::numbers::pi;
      if (angle < 0) angle += 180.0;
      int dr = 0, dc = 0;
      if (angle < 22.5 || angle >= 157.5) {
        dc = 1;
      } else if (angle < 67.5) {
        dr = 1;
        dc = 1;
      } else if (angle < 112.5) {
        dr = 1;
      } else {
        dr = 1;
        dc = -1;
      }
      if (m > g.magnitude(r - dr, c - dc) && m >= g.magnitude(r + dr, c + dc)) thin(r, c) = m;
    }

  std::vector<std::pair<int, int>> stack;
  for (int r = 1; r < h - 1; ++r)
    for (int c = 1; c < w - 1; ++c)
      if (thin(r, c) >= th.high && !edges(r, c)) {
        edges(r, c) = 1;
        stack.emplace_back(r, c);
        while (!stack.empty()) {
          const auto [pr, pc] = stack.back();
          stack.pop_back();
          for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
              const int rr = pr + dr, cc = pc + dc;
              if (!edges.contains(rr, cc) || edges(rr, cc)) continue;
              if (thin(rr, cc) >= th.low && thin(rr, cc) > 0.0) {
                edges(rr, cc) = 1;
                stack.emplace_back(rr, cc);
              }
            }
        }
      }
  return edges;
}

}  // namespace smear

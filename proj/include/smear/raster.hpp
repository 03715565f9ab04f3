#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smear/error.hpp"

namespace smear {

/// Row-major 2D raster. `Tag` distinguishes rasters that share a pixel type
/// but not a meaning (intensities vs. correlation scores).
template <class T, class Tag = void>
class Raster {
public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1)
      throw InvalidArgument("raster dimensions must be positive, got " + std::to_string(width) +
                            "x" + std::to_string(height));
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Raster(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1)
      throw InvalidArgument("raster dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw DimensionError("raster data length " + std::to_string(data_.size()) + " != " +
                           std::to_string(width) + "x" + std::to_string(height));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int row, int col) noexcept { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const noexcept { return data_[index(row, col)]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  bool contains(int row, int col) const noexcept {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  std::span<T> row(int r) noexcept { return std::span<T>(data_).subspan(index(r, 0), width_); }
  std::span<const T> row(int r) const noexcept {
    return std::span<const T>(data_).subspan(index(r, 0), width_);
  }

  template <class U, class OtherTag>
  bool same_shape(const Raster<U, OtherTag>& o) const noexcept {
    return width_ == o.width() && height_ == o.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct GrayTag;
struct MaskTag;
struct LabelTag;

using GrayImage = Raster<double, GrayTag>;
using RgbImage = Raster<Rgb>;
using BinaryMask = Raster<std::uint8_t, MaskTag>;  // nonzero = foreground
using LabelMap = Raster<int, LabelTag>;            // 0 = background

/// Inclusive pixel rectangle, (row, col) with origin top-left.
struct Rect {
  int row_min = 0, row_max = 0, col_min = 0, col_max = 0;

  int height() const noexcept { return row_max - row_min + 1; }
  int width() const noexcept { return col_max - col_min + 1; }
  bool valid() const noexcept { return row_min <= row_max && col_min <= col_max; }
  bool contains(int row, int col) const noexcept {
    return row >= row_min && row <= row_max && col >= col_min && col <= col_max;
  }
  bool contains(double row, double col) const noexcept {
    return row >= row_min && row <= row_max && col >= col_min && col <= col_max;
  }
  bool inside(int width, int height) const noexcept {
    return valid() && row_min >= 0 && col_min >= 0 && row_max < height && col_max < width;
  }
  Rect clipped_to(const Rect& b) const noexcept {
    return {std::max(row_min, b.row_min), std::min(row_max, b.row_max), std::max(col_min, b.col_min),
            std::min(col_max, b.col_max)};
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

template <class T, class Tag>
Rect bounds_of(const Raster<T, Tag>& img) noexcept {
  return {0, img.height() - 1, 0, img.width() - 1};
}

struct PointRC {
  double row = 0.0;
  double col = 0.0;
  friend bool operator==(const PointRC&, const PointRC&) = default;
};

inline double distance(const PointRC& a, const PointRC& b) noexcept {
  return std::hypot(a.row - b.row, a.col - b.col);
}

using Histogram = std::array<std::size_t, 256>;

/// 8-bit level of a normalized intensity; half-way values round up.
inline int quantize(double v) noexcept {
  const double scaled = std::round(v * 255.0);
  return static_cast<int>(std::clamp(scaled, 0.0, 255.0));
}

inline GrayImage clamp01(GrayImage img) {
  for (double& v : img.pixels()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

inline Histogram histogram256(const GrayImage& img) {
  Histogram h{};
  for (double v : img.pixels()) ++h[static_cast<std::size_t>(quantize(v))];
  return h;
}

inline std::size_t count_foreground(const BinaryMask& m) {
  return static_cast<std::size_t>(std::count_if(m.pixels().begin(), m.pixels().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

/// Copy of `r`; throws BoundsError when `r` is not inside `img`.
template <class T, class Tag>
Raster<T, Tag> crop(const Raster<T, Tag>& img, const Rect& r) {
  if (!r.inside(img.width(), img.height()))
    throw BoundsError("rect rows " + std::to_string(r.row_min) + ".." + std::to_string(r.row_max) + " cols " +
                      std::to_string(r.col_min) + ".." + std::to_string(r.col_max) + " outside " +
                      std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
  Raster<T, Tag> out(r.width(), r.height());
  for (int row = 0; row < r.height(); ++row)
    std::copy_n(img.row(r.row_min + row).begin() + r.col_min, r.width(), out.row(row).begin());
  return out;
}

/// Min-max normalization to [0,1]; a flat input maps to zeros.
template <class Tag>
GrayImage normalize_minmax(const Raster<double, Tag>& src) {
  GrayImage out(src.width(), src.height());
  const auto [lo, hi] = std::minmax_element(src.pixels().begin(), src.pixels().end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = (src[i] - *lo) / span;
  return out;
}

inline GrayImage mask_to_gray(const BinaryMask& m) {
  GrayImage out(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 1.0 : 0.0;
  return out;
}

}  // namespace smear

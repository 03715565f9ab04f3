#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "smear/error.hpp"
#include "smear/fft.hpp"
#include "smear/raster.hpp"

namespace smear {

/// 2D frequency representation. When `dc_centered`, the zero-frequency bin
/// sits at (height/2, width/2) (integer division).
struct Spectrum {
  int width = 0;
  int height = 0;
  std::vector<fft::Complex> data;
  bool dc_centered = true;

  fft::Complex& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  const fft::Complex& operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
};

namespace detail {

// Circular shift by (dr, dc); (h/2, w/2) centers DC, its negation undoes it.
inline std::vector<fft::Complex> circshift(const std::vector<fft::Complex>& in, int width, int height, int dr,
                                           int dc) {
  std::vector<fft::Complex> out(in.size());
  for (int r = 0; r < height; ++r) {
    const int rr = ((r + dr) % height + height) % height;
    for (int c = 0; c < width; ++c) {
      const int cc = ((c + dc) % width + width) % width;
      out[static_cast<std::size_t>(rr) * width + cc] = in[static_cast<std::size_t>(r) * width + c];
    }
  }
  return out;
}

}  // namespace detail

inline Spectrum dft2(const GrayImage& img) {
  std::vector<fft::Complex> data(img.pixels().begin(), img.pixels().end());
  fft::transform2d(data, img.width(), img.height(), false);
  return {img.width(), img.height(), detail::circshift(data, img.width(), img.height(), img.height() / 2, img.width() / 2),
          true};
}

/// Inverse transform without the final clamp. Throws NumericError when the
/// result carries an imaginary residue above `max_imag`.
inline GrayImage idft2_unclamped(const Spectrum& spec, double max_imag = 1e-6) {
  std::vector<fft::Complex> data =
      spec.dc_centered ? detail::circshift(spec.data, spec.width, spec.height, -(spec.height / 2), -(spec.width / 2))
                       : spec.data;
  fft::transform2d(data, spec.width, spec.height, true);
  const double scale = 1.0 / static_cast<double>(data.size());
  GrayImage out(spec.width, spec.height);
  double worst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = data[i].real() * scale;
    worst = std::max(worst, std::abs(data[i].imag() * scale));
  }
  if (worst >= max_imag)
    throw NumericError("inverse transform left imaginary residue " + std::to_string(worst) +
                       "; spectrum is not Hermitian-symmetric");
  return out;
}

inline GrayImage idft2(const Spectrum& spec) { return clamp01(idft2_unclamped(spec)); }

struct ButterworthParams {
  int order = 9;
  double cutoff = 0.25;  // normalized radial frequency, 0.5 = Nyquist

  void validate() const {
    if (order < 1) throw InvalidArgument("butterworth order must be >= 1");
    if (!(cutoff > 0.0 && cutoff <= 0.5)) throw InvalidArgument("butterworth cutoff must lie in (0, 0.5]");
  }
};

inline double butterworth_gain(double d, const ButterworthParams& p) {
  return 1.0 / (1.0 + std::pow(d / p.cutoff, 2.0 * p.order));
}

/// Radial distance of bin (r, c) of a DC-centered spectrum, with each axis
/// normalized by its own length.
inline double normalized_radius(int r, int c, int width, int height) {
  const double u = static_cast<double>(r - height / 2) / height;
  const double v = static_cast<double>(c - width / 2) / width;
  return std::sqrt(u * u + v * v);
}

inline GrayImage lowpass_filter_unclamped(const GrayImage& img, const ButterworthParams& p) {
  p.validate();
  Spectrum spec = dft2(img);
  for (int r = 0; r < spec.height; ++r)
    for (int c = 0; c < spec.width; ++c) spec(r, c) *= butterworth_gain(normalized_radius(r, c, spec.width, spec.height), p);
  return idft2_unclamped(spec);
}

inline GrayImage lowpass_filter(const GrayImage& img, const ButterworthParams& p) {
  return clamp01(lowpass_filter_unclamped(img, p));
}

/// log(1 + |F|), min-max normalized. DC ends up at the image center.
inline GrayImage spectrum_view(const Spectrum& spec) {
  const std::vector<fft::Complex> centered =
      spec.dc_centered ? spec.data : detail::circshift(spec.data, spec.width, spec.height, spec.height / 2, spec.width / 2);
  Raster<double> mag(spec.width, spec.height);
  for (std::size_t i = 0; i < centered.size(); ++i) mag[i] = std::log1p(std::abs(centered[i]));
  return normalize_minmax(mag);
}

/// 256-level lookup table of standard histogram equalization. Identity when
/// only one level is occupied.
inline std::array<int, 256> equalization_lut(const Histogram& hist) {
  std::array<int, 256> lut{};
  std::size_t total = 0;
  for (std::size_t n : hist) total += n;
  std::size_t cdf_min = 0;
  for (std::size_t n : hist)
    if (n != 0) {
      cdf_min = n;
      break;
    }
  if (total == 0 || cdf_min == total) {
    for (int k = 0; k < 256; ++k) lut[k] = k;
    return lut;
  }
  std::size_t cdf = 0;
  const double denom = static_cast<double>(total - cdf_min);
  for (int k = 0; k < 256; ++k) {
    cdf += hist[k];
    const double num = cdf >= cdf_min ? static_cast<double>(cdf - cdf_min) : 0.0;
    lut[k] = static_cast<int>(std::lround(255.0 * num / denom));
  }
  return lut;
}

inline GrayImage equalize_histogram(const GrayImage& img) {
  const Histogram hist = histogram256(img);
  if (std::count_if(hist.begin(), hist.end(), [](std::size_t n) { return n != 0; }) <= 1) return img;
  const auto lut = equalization_lut(hist);
  GrayImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = lut[quantize(img[i])] / 255.0;
  return out;
}

}  // namespace smear

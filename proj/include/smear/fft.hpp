#pragma once

// Arbitrary-length complex FFT: iterative radix-2 for powers of two,
// Bluestein's chirp-z reduction for every other length.

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace smear::fft {

using Complex = std::complex<double>;

namespace detail {

inline void radix2(std::span<Complex> a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> twiddle;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    twiddle.resize(half);
    // Direct evaluation per index avoids drift from repeated multiplication.
    for (std::size_t k = 0; k < half; ++k)
      twiddle[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len));
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * twiddle[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

inline void bluestein(std::span<Complex> a, bool inverse) {
  const std::size_t n = a.size();
  const std::size_t m = std::bit_ceil(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;

  std::vector<Complex> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small for large k.
    const std::size_t k2 = (k * k) % (2 * n);
    chirp[k] = std::polar(1.0, sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n));
  }

  std::vector<Complex> x(m), y(m);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
  y[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);

  radix2(x, false);
  radix2(y, false);
  for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
  radix2(x, true);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * scale * chirp[k];
}

}  // namespace detail

/// In-place unnormalized DFT: forward uses exp(-2*pi*i*k*n/N); inverse
/// uses the conjugate kernel without the 1/N factor.
inline void transform(std::span<Complex> a, bool inverse = false) {
  if (a.size() <= 1) return;
  if (std::has_single_bit(a.size()))
    detail::radix2(a, inverse);
  else
    detail::bluestein(a, inverse);
}

/// In-place 2D transform of a row-major height x width array.
inline void transform2d(std::span<Complex> data, int width, int height, bool inverse = false) {
  for (int r = 0; r < height; ++r)
    transform(data.subspan(static_cast<std::size_t>(r) * width, width), inverse);
  std::vector<Complex> column(static_cast<std::size_t>(height));
  for (int c = 0; c < width; ++c) {
    for (int r = 0; r < height; ++r) column[r] = data[static_cast<std::size_t>(r) * width + c];
    transform(column, inverse);
    for (int r = 0; r < height; ++r) data[static_cast<std::size_t>(r) * width + c] = column[r];
  }
}

}  // namespace smear::fft

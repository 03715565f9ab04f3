#pragma once

// Synthetic blood-smear generator with known ground truth: bright background,
// mid-gray red discs, white cells (lighter cytoplasm disc + dark lobed
// nucleus), optional non-circular dark smudges, then contrast compression
// and a column sinusoid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "smear/error.hpp"
#include "smear/raster.hpp"

namespace smear {

struct SynthSpec {
  int width = 512;
  int height = 512;
  int n_red = 46;
  double red_radius = 15.0;
  int n_white = 2;
  double white_radius = 60.0;
  int n_smudges = 0;
  bool overlap_allowed = false;
  double noise_amplitude = 0.1;
  double noise_frequency = 0.45;
  double contrast_scale = 0.5;
  std::uint64_t rng_seed = 1;

  void validate() const {
    if (width < 1 || height < 1) throw InvalidArgument("synth: canvas must be non-empty");
    if (n_red < 0 || n_white < 0 || n_smudges < 0) throw InvalidArgument("synth: counts must be >= 0");
    if (!(red_radius >= 1.0) || !(white_radius >= 1.0)) throw InvalidArgument("synth: radii must be >= 1");
    if (!(contrast_scale > 0.0 && contrast_scale <= 1.0)) throw InvalidArgument("synth: contrast_scale must lie in (0, 1]");
    if (noise_amplitude < 0.0) throw InvalidArgument("synth: noise_amplitude must be >= 0");
    const double biggest = n_white > 0 ? std::max(white_radius, red_radius) : red_radius;
    if ((n_red > 0 || n_white > 0) && 2.0 * biggest + 6.0 > std::min(width, height))
      throw GenerationError("synth: cells do not fit inside the canvas");
  }
};

struct SynthTruth {
  std::vector<PointRC> white_centers;
  std::vector<PointRC> red_centers;
  std::vector<PointRC> smudge_centers;
};

struct SynthResult {
  GrayImage image;
  SynthTruth truth;
};

namespace synth_detail {

inline constexpr double kBackground = 0.75;
inline constexpr double kRed = 0.55;
inline constexpr double kCytoplasm = 0.65;
inline constexpr double kNucleus = 0.15;

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // 53-bit uniform in [0, 1); independent of the standard library's
  // distribution implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int pick(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

private:
  std::mt19937_64 engine_;
};

// Coverage of a disc boundary with a 2-px linear rim centered on the radius.
inline double rim_alpha(double dist, double radius) { return std::clamp((radius + 1.0 - dist) / 2.0, 0.0, 1.0); }

inline void paint_disc(GrayImage& img, PointRC c, double radius, double value) {
  const int r0 = std::max(0, static_cast<int>(std::floor(c.row - radius - 2)));
  const int r1 = std::min(img.height() - 1, static_cast<int>(std::ceil(c.row + radius + 2)));
  const int c0 = std::max(0, static_cast<int>(std::floor(c.col - radius - 2)));
  const int c1 = std::min(img.width() - 1, static_cast<int>(std::ceil(c.col + radius + 2)));
  for (int r = r0; r <= r1; ++r)
    for (int q = c0; q <= c1; ++q) {
      const double a = rim_alpha(std::hypot(r - c.row, q - c.col), radius);
      img(r, q) += a * (value - img(r, q));
    }
}

inline void paint_ellipse(GrayImage& img, PointRC c, double semi_major, double semi_minor, double angle, double value) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  const int reach = static_cast<int>(std::ceil(semi_major + 2));
  for (int r = std::max(0, static_cast<int>(c.row) - reach); r <= std::min(img.height() - 1, static_cast<int>(c.row) + reach); ++r)
    for (int q = std::max(0, static_cast<int>(c.col) - reach); q <= std::min(img.width() - 1, static_cast<int>(c.col) + reach);
         ++q) {
      const double dy = r - c.row, dx = q - c.col;
      const double u = (dx * ca + dy * sa) / semi_major, v = (-dx * sa + dy * ca) / semi_minor;
      const double q_norm = std::hypot(u, v);
      // Approximate distance to the boundary in minor-axis pixels.
      const double a = std::clamp(((1.0 - q_norm) * semi_minor + 1.0) / 2.0, 0.0, 1.0);
      img(r, q) += a * (value - img(r, q));
    }
}

struct Placed {
  PointRC center;
  double extent;
  int kind;  // 0 red, 1 white, 2 smudge
};

}  // namespace synth_detail

/// Renders a smear; the same spec (including seed) always yields the same
/// image and truth. The image is quantized to 8-bit levels.
inline SynthResult synth_smear(const SynthSpec& spec) {
  using namespace synth_detail;
  spec.validate();
  Rng rng(spec.rng_seed);
  const double smudge_major = 0.3 * spec.white_radius, smudge_minor = smudge_major / 3.0;

  std::vector<Placed> placed;
  auto min_separation = [&](const Placed& a, const Placed& b) {
    double d = a.extent + b.extent + 3.0;
    const int lo = std::min(a.kind, b.kind), hi = std::max(a.kind, b.kind);
    // Smudges stay clear of white-cell search windows and of each other's
    // nucleus-merge radius.
    if (lo == 1 && hi == 2) d = std::max(d, 1.6 * spec.white_radius);
    if (lo == 2 && hi == 2) d = std::max(d, 2.0 * smudge_major + 1.1 * spec.white_radius);
    return d;
  };
  auto place = [&](double extent, int kind) -> PointRC {
    const double lo_r = extent + 2.0, hi_r = spec.height - extent - 3.0;
    const double lo_c = extent + 2.0, hi_c = spec.width - extent - 3.0;
    if (hi_r < lo_r || hi_c < lo_c) throw GenerationError("synth: cell does not fit inside the canvas");
    for (int attempt = 0; attempt < 20000; ++attempt) {
      const Placed cand{{rng.uniform(lo_r, hi_r), rng.uniform(lo_c, hi_c)}, extent, kind};
      bool ok = true;
      if (!spec.overlap_allowed)
        for (const Placed& p : placed)
          if (distance(p.center, cand.center) < min_separation(p, cand)) {
            ok = false;
            break;
          }
      if (ok) {
        placed.push_back(cand);
        return cand.center;
      }
    }
    throw GenerationError("synth: cannot pack " + std::to_string(placed.size() + 1) +
                          " cells without overlap; lower the counts or allow overlap");
  };

  SynthResult out{GrayImage(spec.width, spec.height, kBackground), {}};
  for (int i = 0; i < spec.n_white; ++i) out.truth.white_centers.push_back(place(spec.white_radius, 1));
  for (int i = 0; i < spec.n_smudges; ++i) out.truth.smudge_centers.push_back(place(smudge_major, 2));
  for (int i = 0; i < spec.n_red; ++i) out.truth.red_centers.push_back(place(spec.red_radius, 0));

  GrayImage& img = out.image;
  for (const PointRC& c : out.truth.red_centers) paint_disc(img, c, spec.red_radius, kRed);
  for (const PointRC& c : out.truth.white_centers) {
    paint_disc(img, c, spec.white_radius, kCytoplasm);
    // Nucleus: one to three overlapping or nearly touching lobes.
    const int lobes = rng.pick(1, 3);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int k = 0; k < lobes; ++k) {
      const double lobe_r = 0.28 * spec.white_radius * rng.uniform(0.9, 1.1);
      const double offset = lobes == 1 ? rng.uniform(0.0, 0.1) * spec.white_radius : 0.3 * spec.white_radius;
      const double theta = phase + 2.0 * std::numbers::pi * k / lobes + rng.uniform(-0.2, 0.2);
      paint_disc(img, {c.row + offset * std::sin(theta), c.col + offset * std::cos(theta)}, lobe_r, kNucleus);
    }
  }
  for (const PointRC& c : out.truth.smudge_centers)
    paint_ellipse(img, c, smudge_major, smudge_minor, rng.uniform(0.0, std::numbers::pi), kNucleus);

  const double omega = 2.0 * std::numbers::pi * spec.noise_frequency;
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) {
      const double v = 0.5 + (img(r, c) - 0.5) * spec.contrast_scale + spec.noise_amplitude * std::sin(omega * c);
      img(r, c) = quantize(v) / 255.0;
    }
  return out;
}

}  // namespace smear

#pragma once

// Shared fixtures: the seeded synthetic suite and operator-style template
// selection from ground truth.

#include <cmath>
#include <string>
#include <vector>

#include "smear/pipeline.hpp"
#include "smear/synth.hpp"

namespace harness {

inline const std::vector<double> kWeights{1.0, 1.0, 1.2, 1.0, 1.2};

// 512x512, 1-3 white cells, 40-60 red cells, sinusoid 0.1 at 0.45,
// contrast 0.5.
inline smear::SynthSpec suite_spec(int seed, int smudges = 0) {
  smear::SynthSpec s;
  s.rng_seed = static_cast<std::uint64_t>(seed);
  s.n_white = 1 + seed % 3;
  s.n_red = 40 + (seed * 7) % 21;
  s.n_smudges = smudges;
  s.noise_amplitude = 0.1;
  s.noise_frequency = 0.45;
  s.contrast_scale = 0.5;
  return s;
}

// The first red cells whose box (center +- radius + 3) fits in the image,
// one per weight.
inline std::vector<smear::TemplateSpec> templates_from_truth(const smear::SynthSpec& spec, const smear::SynthTruth& truth,
                                                             const std::vector<double>& weights = kWeights) {
  std::vector<smear::TemplateSpec> out;
  const int half = static_cast<int>(spec.red_radius) + 3;
  for (const smear::PointRC& c : truth.red_centers) {
    if (out.size() == weights.size()) break;
    const int r = static_cast<int>(std::lround(c.row)), q = static_cast<int>(std::lround(c.col));
    const smear::Rect rect{r - half, r + half, q - half, q + half};
    if (!rect.inside(spec.width, spec.height)) continue;
    out.push_back({std::to_string(out.size() + 1), rect, weights[out.size()]});
  }
  return out;
}

inline smear::PipelineConfig suite_config(const smear::SynthSpec& spec, const smear::SynthTruth& truth) {
  smear::PipelineConfig cfg;
  cfg.templates = templates_from_truth(spec, truth);
  return cfg;
}

}  // namespace harness

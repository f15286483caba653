#pragma once

// Random spectral summaries for which the theorem admits at least m = 1.
// Sampling the ratios directly (instead of drawing factors) reaches far
// larger r than any factor we could afford to build.

#include "hsketch/bounds.hpp"
#include "hsketch/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace oracle {

inline double uniform(hsketch::SplitMix64& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform01();
}

/// Draws r log-uniform in [1e3, 1e6], ell in [0.2, 1], L in [1, 10],
/// Tr/||H||_2 = t2, (Tr/||H||_F)^2 = tf in their feasible ranges, and mu small
/// enough that m_max >= 1. trace = 1.
inline hsketch::SpectralSummary random_admissible_summary(hsketch::SplitMix64& rng) {
  hsketch::SpectralSummary s;
  const double r = std::floor(std::exp(uniform(rng, std::log(1e3), std::log(1e6))));
  s.r = static_cast<std::size_t>(r);
  s.n = s.r * 10;
  s.ell = uniform(rng, 0.2, 1.0);
  s.big_l = uniform(rng, 1.0, 10.0);
  // First m_max term >= 1 needs t2 >= 146 e^{1/4} / ell + 1 (~187.5/ell + 1).
  const double t2_lo = 188.0 / s.ell + 1.0;
  const double t2 = uniform(rng, std::min(t2_lo, r), r);
  const double tf = uniform(rng, t2, std::min(r, t2 * t2));
  s.trace = 1.0;
  s.snorm = 1.0 / t2;
  s.frob = 1.0 / std::sqrt(tf);
  const double mu_max = s.ell * std::sqrt(tf / (149.0 * std::exp(0.5) * std::log(r)));
  s.mu = uniform(rng, 0.0, mu_max);
  return s;
}

}  // namespace oracle

#pragma once

#include "hsketch/numkit.hpp"

#include <cstddef>
#include <cstdint>

namespace hsketch {

/// Relative spectral parameters of one Hessian H = phi phi^T.
struct SpectralSummary {
  std::size_t n = 0;
  std::size_t r = 0;
  double trace = 0.0;
  double frob = 0.0;   // ||H||_F
  double snorm = 0.0;  // ||H||_2
  double ell = 0.0;    // N min_i H_ii / Tr(H)
  double big_l = 0.0;  // N max_i H_ii / Tr(H)
  double mu = 0.0;     // N max_{i!=j} |H_ij| / ||H||_F
};

struct DiagVariation {
  double ell;
  double big_l;
};

/// Normalized min/max diagonal of H. Throws DegenerateError on a zero row.
DiagVariation diag_variation(const GramFactor& f);

/// Exact coherence, scanning every off-diagonal entry of H in row panels of
/// `panel_rows` rows. Returns 0 for N = 1. Throws DegenerateError when
/// ||H||_F = 0.
double coherence(const GramFactor& f, std::size_t panel_rows = 256);

/// Monte Carlo under-estimate of the coherence from `pairs` random
/// off-diagonal entries. For profiling only; never feeds the bounds.
double coherence_sampled_lower_bound(const GramFactor& f, std::size_t pairs,
                                     std::uint64_t seed);

SpectralSummary summarize(const GramFactor& f);

}  // namespace hsketch

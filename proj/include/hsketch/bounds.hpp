#pragma once

#include "hsketch/spectral.hpp"

#include <cstddef>
#include <span>

namespace hsketch {

/// Closed-form quantities of the well-conditioning theorem at one sample size.
struct TheoremReport {
  std::size_t m = 0;
  double tau = 0.0;
  double threshold = 0.0;    // (L + tau) / (ell - tau), infinite when ell <= tau
  double crude_bound = 0.0;  // 73 r (L + ell) / ell
  double success_prob = 0.0; // 1 - 1/r
  double m_max = 0.0;
  bool admissible = false;   // m <= m_max
};

/// tau(m) = e^{1/4} (2m ||H||_2/Tr + 12 mu sqrt(m log r) ||H||_F/Tr).
/// Requires m >= 1 and r >= 2.
double distortion(const SpectralSummary& s, std::size_t m, std::size_t r);

/// Largest sample size the theorem admits:
/// min{ ell/(146 e^{1/4}) (Tr/||H||_2 - 1), ell^2/(149 e^{1/2} mu^2 log r) (Tr/||H||_F)^2 }.
/// The second term is +inf when mu = 0.
double max_sample_size(const SpectralSummary& s, std::size_t r);

TheoremReport condition_threshold(const SpectralSummary& s, std::size_t m, std::size_t r);

struct RefinedParams {
  double ell0;
  double big_l0;
};

/// q-quantile under the nearest-rank convention: the ceil(q n)-th smallest.
double nearest_rank_quantile(std::span<const double> values, double q);

/// High-probability cut-offs of the sampled diagonal: ell0 is the (eta/2)
/// quantile of the per-trial minima, L0 the (1 - eta/2) quantile of the
/// per-trial maxima, both divided by Tr(H)/N.
RefinedParams refined_quantile_params(std::span<const double> min_diags,
                                      std::span<const double> max_diags, double eta,
                                      double trace_over_n);

}  // namespace hsketch

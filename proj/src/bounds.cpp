#include "hsketch/bounds.hpp"

#include "hsketch/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hsketch {

namespace {

const double kE4 = std::exp(0.25);
const double kE2 = std::exp(0.5);

void require_rank(std::size_t r, const char* who) {
  if (r < 2) throw ContractError(std::string(who) + ": r must be >= 2 so that log r > 0");
}

}  // namespace

double distortion(const SpectralSummary& s, std::size_t m, std::size_t r) {
  require_rank(r, "distortion");
  if (m < 1) throw ContractError("distortion: m must be >= 1");
  const double md = static_cast<double>(m);
  const double log_r = std::log(static_cast<double>(r));
  return kE4 * (2.0 * md * s.snorm / s.trace +
                12.0 * s.mu * std::sqrt(md * log_r) * s.frob / s.trace);
}

double max_sample_size(const SpectralSummary& s, std::size_t r) {
  require_rank(r, "max_sample_size");
  const double first = s.ell / (146.0 * kE4) * (s.trace / s.snorm - 1.0);
  if (s.mu == 0.0) return first;
  const double ratio = s.trace / s.frob;
  const double second = s.ell * s.ell /
                        (149.0 * kE2 * s.mu * s.mu * std::log(static_cast<double>(r))) *
                        ratio * ratio;
  return std::min(first, second);
}

TheoremReport condition_threshold(const SpectralSummary& s, std::size_t m, std::size_t r) {
  TheoremReport rep;
  rep.m = m;
  rep.tau = distortion(s, m, r);
  const double gap = s.ell - rep.tau;
  rep.threshold = gap > 0.0 ? (s.big_l + rep.tau) / gap : std::numeric_limits<double>::infinity();
  rep.crude_bound = 73.0 * static_cast<double>(r) * (s.big_l + s.ell) / s.ell;
  rep.success_prob = 1.0 - 1.0 / static_cast<double>(r);
  rep.m_max = max_sample_size(s, r);
  rep.admissible = static_cast<double>(m) <= rep.m_max;
  return rep;
}

double nearest_rank_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw ContractError("nearest_rank_quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ContractError("nearest_rank_quantile: q outside [0,1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Guard against q*n landing a hair above an integer (0.2 * 10000).
  const double pos = std::ceil(q * static_cast<double>(sorted.size()) - 1e-9);
  const auto rank = static_cast<std::size_t>(std::max(pos, 1.0));
  return sorted[std::min(rank, sorted.size()) - 1];
}

RefinedParams refined_quantile_params(std::span<const double> min_diags,
                                      std::span<const double> max_diags, double eta,
                                      double trace_over_n) {
  if (min_diags.empty() || max_diags.empty())
    throw ContractError("refined_quantile_params: empty samples");
  if (!(eta > 0.0 && eta <= 0.5))
    throw ContractError("refined_quantile_params: eta must lie in (0, 1/2]");
  if (!(trace_over_n > 0.0))
    throw ContractError("refined_quantile_params: Tr(H)/N must be positive");
  return {nearest_rank_quantile(min_diags, eta / 2.0) / trace_over_n,
          nearest_rank_quantile(max_diags, 1.0 - eta / 2.0) / trace_over_n};
}

}  // namespace hsketch

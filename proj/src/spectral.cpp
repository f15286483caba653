#include "hsketch/spectral.hpp"

#include "hsketch/error.hpp"
#include "hsketch/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hsketch {

DiagVariation diag_variation(const GramFactor& f) {
  const Eigen::VectorXd d = f.phi().rowwise().squaredNorm();
  const double lo = d.minCoeff();
  if (!(lo > 0.0)) {
    Eigen::Index at = 0;
    d.minCoeff(&at);
    throw DegenerateError("degenerate diagonal: row " + std::to_string(at) +
                          " of phi has zero norm");
  }
  const double mean = d.sum() / static_cast<double>(d.size());
  return {lo / mean, d.maxCoeff() / mean};
}

double coherence(const GramFactor& f, std::size_t panel_rows) {
  const double frob = trace_and_frobenius(f).frob;
  if (!(frob > 0.0)) throw DegenerateError("coherence: ||H||_F is zero");
  const auto n = static_cast<Eigen::Index>(f.n());
  if (n == 1) return 0.0;
  const auto panel = static_cast<Eigen::Index>(std::max<std::size_t>(panel_rows, 1));
  const DenseMatrix& phi = f.phi();

  double worst = 0.0;
  DenseMatrix block;
  for (Eigen::Index i0 = 0; i0 < n; i0 += panel) {
    const Eigen::Index ni = std::min(panel, n - i0);
    // Upper triangle only: panel rows [i0, i0+ni) against rows [i0, n).
    block.noalias() = phi.middleRows(i0, ni) * phi.bottomRows(n - i0).transpose();
    for (Eigen::Index a = 0; a < ni; ++a) {
      const Eigen::Index first = a + 1;
      if (first < block.cols())
        worst = std::max(worst, block.row(a).tail(block.cols() - first).cwiseAbs().maxCoeff());
    }
  }
  return static_cast<double>(n) * worst / frob;
}

double coherence_sampled_lower_bound(const GramFactor& f, std::size_t pairs,
                                     std::uint64_t seed) {
  const double frob = trace_and_frobenius(f).frob;
  if (!(frob > 0.0)) throw DegenerateError("coherence: ||H||_F is zero");
  const std::uint64_t n = f.n();
  if (n == 1) return 0.0;
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto i = static_cast<Eigen::Index>(rng.bounded(n));
    auto j = static_cast<Eigen::Index>(rng.bounded(n - 1));
    if (j >= i) ++j;
    worst = std::max(worst, std::abs(f.phi().row(i).dot(f.phi().row(j))));
  }
  return static_cast<double>(n) * worst / frob;
}

SpectralSummary summarize(const GramFactor& f) {
  SpectralSummary s;
  s.n = f.n();
  s.r = f.r();
  const auto tf = trace_and_frobenius(f);
  s.trace = tf.trace;
  s.frob = tf.frob;
  s.snorm = spectral_norm(f);
  const auto dv = diag_variation(f);
  s.ell = dv.ell;
  s.big_l = dv.big_l;
  s.mu = coherence(f);
  return s;
}

}  // namespace hsketch

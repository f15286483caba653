#include "hsketch/sketch.hpp"

#include "hsketch/error.hpp"

#include <numeric>
#include <string>

namespace hsketch {

std::string_view to_string(SamplingMode mode) noexcept {
  return mode == SamplingMode::kWithReplacement ? "with-replacement" : "without-replacement";
}

SamplingMode parse_sampling_mode(std::string_view text) {
  if (text == "with-replacement" || text == "replace" || text == "iid")
    return SamplingMode::kWithReplacement;
  if (text == "without-replacement" || text == "no-replace" || text == "subset")
    return SamplingMode::kWithoutReplacement;
  throw ContractError("unknown sampling mode '" + std::string(text) + "'");
}

SketchSelector draw_uniform_selector(std::size_t n, std::size_t m, SplitMix64& rng,
                                     SamplingMode mode) {
  if (n == 0) throw ContractError("draw_uniform_selector: n must be positive");
  if (m == 0) throw ContractError("draw_uniform_selector: m must be positive");
  SketchSelector s;
  s.indices.resize(m);
  if (mode == SamplingMode::kWithReplacement) {
    for (auto& idx : s.indices) idx = static_cast<std::size_t>(rng.bounded(n));
    return s;
  }
  if (m > n)
    throw ContractError("draw_uniform_selector: m=" + std::to_string(m) + " exceeds n=" +
                        std::to_string(n) + " without replacement");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t pick = a + static_cast<std::size_t>(rng.bounded(n - a));
    std::swap(pool[a], pool[pick]);
    s.indices[a] = pool[a];
  }
  return s;
}

DenseMatrix sketch_hessian(const GramFactor& f, const SketchSelector& s) {
  const auto m = static_cast<Eigen::Index>(s.m());
  DenseMatrix rows(m, f.phi().cols());
  for (Eigen::Index a = 0; a < m; ++a) {
    const std::size_t idx = s.indices[static_cast<std::size_t>(a)];
    if (idx >= f.n())
      throw ContractError("sketch_hessian: index " + std::to_string(idx) + " out of range");
    rows.row(a) = f.phi().row(static_cast<Eigen::Index>(idx));
  }
  DenseMatrix h(m, m);
  h.setZero();
  h.selfadjointView<Eigen::Lower>().rankUpdate(rows);
  h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
  return h;
}

DenseMatrix hollow_part(const DenseMatrix& h_s) {
  if (h_s.rows() != h_s.cols()) throw ContractError("hollow_part: matrix is not square");
  DenseMatrix out = h_s;
  out.diagonal().setZero();
  return out;
}

}  // namespace hsketch

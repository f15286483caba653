#pragma once

#include "hsketch/numkit.hpp"
#include "hsketch/rng.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace hsketch {

enum class SamplingMode { kWithReplacement, kWithoutReplacement };

std::string_view to_string(SamplingMode mode) noexcept;
SamplingMode parse_sampling_mode(std::string_view text);

/// Ordered row indices omega_1..omega_m; row a of S is e_{omega_a}.
struct SketchSelector {
  std::vector<std::size_t> indices;

  std::size_t m() const noexcept { return indices.size(); }
};

/// m uniform draws from [0, n). With replacement: i.i.d. Without: a uniform
/// m-subset in random order (partial Fisher-Yates).
SketchSelector draw_uniform_selector(std::size_t n, std::size_t m, SplitMix64& rng,
                                     SamplingMode mode = SamplingMode::kWithReplacement);

/// H_s = (S phi)(S phi)^T, an m x m principal submatrix of H.
DenseMatrix sketch_hessian(const GramFactor& f, const SketchSelector& s);

/// M_s = H_s - diag(H_s).
DenseMatrix hollow_part(const DenseMatrix& h_s);

}  // namespace hsketch

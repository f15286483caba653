#pragma once

#include "hsketch/numkit.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace hsketch {

enum class Distribution { kGaussian, kUniform01, kBernoulli01 };

std::string_view to_string(Distribution d) noexcept;
Distribution parse_distribution(std::string_view text);

struct SyntheticSpec {
  std::size_t n = 5000;
  std::size_t r = 50;
  Distribution distribution = Distribution::kGaussian;
  std::uint64_t seed = 0;
  double bernoulli_p = 0.5;
};

struct SyntheticFactor {
  GramFactor factor;
  /// Bernoulli rows that came out all-zero and were drawn again.
  std::size_t redrawn_rows = 0;
};

/// I.i.d. factor entries: N(0,1) via the Marsaglia polar method, U[0,1), or
/// Bernoulli(p) in {0,1}. All-zero Bernoulli rows are redrawn so that every
/// diagonal of H is strictly positive.
SyntheticFactor gen_factor(const SyntheticSpec& spec);

}  // namespace hsketch

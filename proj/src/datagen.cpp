#include "hsketch/datagen.hpp"

#include "hsketch/error.hpp"
#include "hsketch/rng.hpp"

#include <cmath>
#include <string>

namespace hsketch {

std::string_view to_string(Distribution d) noexcept {
  switch (d) {
    case Distribution::kGaussian: return "gaussian";
    case Distribution::kUniform01: return "uniform01";
    case Distribution::kBernoulli01: return "bernoulli01";
  }
  return "unknown";
}

Distribution parse_distribution(std::string_view text) {
  if (text == "gaussian" || text == "normal") return Distribution::kGaussian;
  if (text == "uniform01" || text == "uniform") return Distribution::kUniform01;
  if (text == "bernoulli01" || text == "bernoulli") return Distribution::kBernoulli01;
  throw ContractError("unknown distribution '" + std::string(text) + "'");
}

namespace {

class PolarGaussian {
 public:
  explicit PolarGaussian(SplitMix64& rng) : rng_(rng) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * rng_.uniform01() - 1.0;
      v = 2.0 * rng_.uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

 private:
  SplitMix64& rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

SyntheticFactor gen_factor(const SyntheticSpec& spec) {
  if (spec.r < 1 || spec.n < spec.r)
    throw ContractError("gen_factor: need n >= r >= 1");
  if (!(spec.bernoulli_p > 0.0 && spec.bernoulli_p <= 1.0))
    throw ContractError("gen_factor: bernoulli_p must lie in (0,1]");

  SplitMix64 rng(spec.seed);
  DenseMatrix phi(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.r));
  std::size_t redrawn = 0;

  switch (spec.distribution) {
    case Distribution::kGaussian: {
      PolarGaussian normal(rng);
      for (Eigen::Index i = 0; i < phi.rows(); ++i)
        for (Eigen::Index j = 0; j < phi.cols(); ++j) phi(i, j) = normal();
      break;
    }
    case Distribution::kUniform01:
      for (Eigen::Index i = 0; i < phi.rows(); ++i)
        for (Eigen::Index j = 0; j < phi.cols(); ++j) phi(i, j) = rng.uniform01();
      break;
    case Distribution::kBernoulli01:
      for (Eigen::Index i = 0; i < phi.rows(); ++i) {
        for (;;) {
          bool any = false;
          for (Eigen::Index j = 0; j < phi.cols(); ++j) {
            const bool one = rng.uniform01() < spec.bernoulli_p;
            phi(i, j) = one ? 1.0 : 0.0;
            any = any || one;
          }
          if (any) break;
          ++redrawn;
        }
      }
      break;
  }
  return {GramFactor(std::move(phi)), redrawn};
}

}  // namespace hsketch

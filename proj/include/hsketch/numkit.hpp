#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <vector>

namespace hsketch {

/// Row-major dense matrix of doubles.
using DenseMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Factor of a Gauss-Newton Hessian H = phi * phi^T, with phi of shape N x r.
/// H itself is never stored; see `materialize_hessian` for small cases.
class GramFactor {
 public:
  explicit GramFactor(DenseMatrix phi);

  std::size_t n() const noexcept { return static_cast<std::size_t>(phi_.rows()); }
  std::size_t r() const noexcept { return static_cast<std::size_t>(phi_.cols()); }
  const DenseMatrix& phi() const noexcept { return phi_; }

  /// Squared norm of row i, i.e. H_ii.
  double diag(std::size_t i) const { return phi_.row(static_cast<Eigen::Index>(i)).squaredNorm(); }

 private:
  DenseMatrix phi_;
};

/// Eigenvalues sorted in descending order.
struct Spectrum {
  std::vector<double> eigenvalues;

  double largest() const { return eigenvalues.front(); }
  double smallest() const { return eigenvalues.back(); }
  std::size_t size() const noexcept { return eigenvalues.size(); }
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultRankTol = 1e-12;
inline constexpr std::size_t kDefaultMaterializeLimit = 2000;

/// Eigenvalues of a symmetric matrix. Throws ContractError if `a` is not
/// square or not symmetric to 1e-12 relative.
Spectrum sym_eigenvalues(const DenseMatrix& a);

/// The r eigenvalues of phi^T phi; these are the nonzero eigenvalues of H
/// when phi has full column rank.
Spectrum gram_spectrum(const GramFactor& f);

/// ||H||_2, the largest eigenvalue of phi^T phi.
double spectral_norm(const GramFactor& f);

struct TraceFrobenius {
  double trace;
  double frob;
};

/// Tr(H) = ||phi||_F^2 and ||H||_F = ||phi^T phi||_F, both without forming H.
TraceFrobenius trace_and_frobenius(const GramFactor& f);

/// lambda_1 / lambda_last, or infinity when lambda_last <= rank_tol * lambda_1
/// or lambda_1 <= 0.
double condition_number(const Spectrum& s, double rank_tol = kDefaultRankTol);

/// Number of eigenvalues with lambda_k >= threshold * lambda_1.
std::size_t numerical_rank(const Spectrum& s, double threshold);

/// Explicit N x N Hessian. Refuses N above `limit` (ContractError).
DenseMatrix materialize_hessian(const GramFactor& f,
                                std::size_t limit = kDefaultMaterializeLimit);

}  // namespace hsketch

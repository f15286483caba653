#include "hsketch/numkit.hpp"

#include "hsketch/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace hsketch {

GramFactor::GramFactor(DenseMatrix phi) : phi_(std::move(phi)) {
  if (phi_.rows() < 1 || phi_.cols() < 1)
    throw ContractError("GramFactor: phi must be at least 1x1");
  if (phi_.rows() < phi_.cols())
    throw ContractError("GramFactor: need N >= r, got N=" + std::to_string(phi_.rows()) +
                        " r=" + std::to_string(phi_.cols()));
  if (!phi_.allFinite()) throw ContractError("GramFactor: non-finite entry in phi");
}

namespace {

Spectrum descending(const Eigen::VectorXd& ascending) {
  Spectrum s;
  s.eigenvalues.assign(ascending.data(), ascending.data() + ascending.size());
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), std::greater<>());
  return s;
}

Eigen::MatrixXd gram_small(const GramFactor& f) {
  Eigen::MatrixXd g(f.r(), f.r());
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(f.phi().transpose());
  return g.selfadjointView<Eigen::Lower>();
}

}  // namespace

Spectrum sym_eigenvalues(const DenseMatrix& a) {
  if (a.rows() != a.cols())
    throw ContractError("sym_eigenvalues: matrix is " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + ", not square");
  if (a.rows() == 0) throw ContractError("sym_eigenvalues: empty matrix");
  if (!a.allFinite()) throw ContractError("sym_eigenvalues: non-finite entry");
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw ContractError("sym_eigenvalues: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return descending(solver.eigenvalues());
}

Spectrum gram_spectrum(const GramFactor& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram_small(f), Eigen::EigenvaluesOnly);
  return descending(solver.eigenvalues());
}

double spectral_norm(const GramFactor& f) { return gram_spectrum(f).largest(); }

TraceFrobenius trace_and_frobenius(const GramFactor& f) {
  return {f.phi().squaredNorm(), gram_small(f).norm()};
}

double condition_number(const Spectrum& s, double rank_tol) {
  if (s.size() == 0) throw ContractError("condition_number: empty spectrum");
  if (!(rank_tol > 0.0 && rank_tol < 1.0))
    throw ContractError("condition_number: rank_tol must lie in (0,1)");
  const double top = s.largest();
  const double bottom = s.smallest();
  if (!(top > 0.0) || !(bottom > rank_tol * top)) return kInfinity;
  return top / bottom;
}

std::size_t numerical_rank(const Spectrum& s, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ContractError("numerical_rank: threshold must lie in (0,1)");
  if (s.size() == 0 || !(s.largest() > 0.0)) return 0;
  const double cut = threshold * s.largest();
  return static_cast<std::size_t>(std::count_if(
      s.eigenvalues.begin(), s.eigenvalues.end(), [cut](double v) { return v >= cut; }));
}

DenseMatrix materialize_hessian(const GramFactor& f, std::size_t limit) {
  if (f.n() > limit)
    throw ContractError("materialize_hessian: N=" + std::to_string(f.n()) +
                        " exceeds the materialization limit " + std::to_string(limit));
  return f.phi() * f.phi().transpose();
}

}  // namespace hsketch

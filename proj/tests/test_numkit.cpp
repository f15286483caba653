#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsketch/datagen.hpp"
#include "hsketch/error.hpp"
#include "hsketch/numkit.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace hsketch;

namespace {

DenseMatrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  DenseMatrix m(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

void check_spectrum(const Spectrum& s, std::vector<double> expect) {
  REQUIRE(s.size() == expect.size());
  for (std::size_t k = 0; k < expect.size(); ++k)
    CHECK(s.eigenvalues[k] == doctest::Approx(expect[k]).epsilon(1e-12));
}

}  // namespace

TEST_CASE("sym_eigenvalues on hand-checked matrices") {
  check_spectrum(sym_eigenvalues(DenseMatrix::Identity(3, 3)), {1, 1, 1});
  check_spectrum(sym_eigenvalues(mat({{4, 0}, {0, 1}})), {4, 1});
  // det([[2-x,1],[1,2-x]]) = (x-3)(x-1)
  check_spectrum(sym_eigenvalues(mat({{2, 1}, {1, 2}})), {3, 1});
}

TEST_CASE("sym_eigenvalues rejects bad input") {
  CHECK_THROWS_AS(sym_eigenvalues(mat({{1, 2}, {0, 1}})), ContractError);
  CHECK_THROWS_AS(sym_eigenvalues(DenseMatrix(2, 3)), ContractError);
  CHECK_THROWS_AS(sym_eigenvalues(mat({{NAN, 0}, {0, 1}})), ContractError);
}

TEST_CASE("sym_eigenvalues agrees with cyclic Jacobi on random symmetric matrices") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto phi = oracle::random_phi(12, 7, seed);
    const auto h = oracle::naive_hessian(phi);
    const auto ref = oracle::jacobi_eigenvalues(h);
    const auto got = sym_eigenvalues(oracle::to_dense(h));
    REQUIRE(got.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k)
      CHECK(std::abs(got.eigenvalues[k] - ref[k]) <= 1e-10 * ref.front());
  }
}

TEST_CASE("gram_spectrum small cases") {
  check_spectrum(gram_spectrum(GramFactor(DenseMatrix::Identity(3, 3))), {1, 1, 1});
  check_spectrum(gram_spectrum(GramFactor(mat({{1}, {1}}))), {2});
  check_spectrum(gram_spectrum(GramFactor(2.0 * DenseMatrix::Identity(2, 2))), {4, 4});
}

TEST_CASE("gram spectrum equals the nonzero spectrum of H") {
  const auto phi = oracle::random_phi(15, 4, 99);
  const auto ev = oracle::jacobi_eigenvalues(oracle::naive_hessian(phi));
  const auto got = gram_spectrum(GramFactor(oracle::to_dense(phi)));
  for (std::size_t k = 0; k < 4; ++k) CHECK(got.eigenvalues[k] == doctest::Approx(ev[k]).epsilon(1e-10));
  for (std::size_t k = 4; k < ev.size(); ++k) CHECK(std::abs(ev[k]) < 1e-9 * ev.front());
}

TEST_CASE("spectral_norm") {
  CHECK(spectral_norm(GramFactor(DenseMatrix::Identity(3, 3))) == doctest::Approx(1.0));
  CHECK(spectral_norm(GramFactor(mat({{3, 0}, {0, 4}, {0, 0}}))) == doctest::Approx(16.0));
}

TEST_CASE("trace_and_frobenius") {
  auto tf = trace_and_frobenius(GramFactor(DenseMatrix::Identity(3, 3)));
  CHECK(tf.trace == doctest::Approx(3.0));
  CHECK(tf.frob == doctest::Approx(std::sqrt(3.0)));
  tf = trace_and_frobenius(GramFactor(mat({{1, 0}, {0, 2}})));
  CHECK(tf.trace == doctest::Approx(5.0));
  CHECK(tf.frob == doctest::Approx(std::sqrt(17.0)));

  const auto phi = oracle::random_phi(30, 5, 4);
  const auto h = oracle::naive_hessian(phi);
  double tr = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) tr += h[i][i];
  tf = trace_and_frobenius(GramFactor(oracle::to_dense(phi)));
  CHECK(tf.trace == doctest::Approx(tr).epsilon(1e-12));
  CHECK(tf.frob == doctest::Approx(oracle::frobenius(h)).epsilon(1e-12));
}

TEST_CASE("condition_number") {
  CHECK(condition_number(Spectrum{{1, 1, 1}}) == 1.0);
  CHECK(condition_number(Spectrum{{4, 1}}) == 4.0);
  CHECK(std::isinf(condition_number(Spectrum{{1, 1e-14}}, 1e-10)));
  CHECK(std::isinf(condition_number(Spectrum{{0, 0}})));
  CHECK_THROWS_AS(condition_number(Spectrum{{1}}, 0.0), ContractError);
}

TEST_CASE("numerical_rank") {
  CHECK(numerical_rank(Spectrum{{1, 1, 1}}, 1e-6) == 3);
  CHECK(numerical_rank(Spectrum{{1, 1e-8, 1e-8}}, 1e-6) == 1);
  CHECK(numerical_rank(Spectrum{{5, 4, 1e-3}}, 1e-2) == 2);
}

TEST_CASE("materialize_hessian matches the naive product and respects the limit") {
  const auto phi = oracle::random_phi(9, 3, 5);
  const auto h = oracle::naive_hessian(phi);
  const auto got = materialize_hessian(GramFactor(oracle::to_dense(phi)));
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j)
      CHECK(got(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
            doctest::Approx(h[i][j]).epsilon(1e-12));
  CHECK_THROWS_AS(materialize_hessian(GramFactor(oracle::to_dense(phi)), 8), ContractError);
}

TEST_CASE("GramFactor validation") {
  CHECK_THROWS_AS(GramFactor(DenseMatrix(2, 3)), ContractError);
  CHECK_THROWS_AS(GramFactor(DenseMatrix(0, 0)), ContractError);
  CHECK_THROWS_AS(GramFactor(mat({{1}, {INFINITY}})), ContractError);
}

TEST_CASE("Gaussian N=5000 r=50 spectral ratio near the reference value") {
  SyntheticSpec spec;
  spec.n = 5000;
  spec.r = 50;
  spec.seed = 11;
  const auto f = gen_factor(spec).factor;
  const double ratio = spectral_norm(f) / trace_and_frobenius(f).trace;
  // Reference 0.0241, +-15%.
  CHECK(ratio == doctest::Approx(0.0241).epsilon(0.15));
}

TEST_CASE("Gaussian N=5000 r=100 Frobenius ratio near the reference value") {
  SyntheticSpec spec;
  spec.n = 5000;
  spec.r = 100;
  spec.seed = 12;
  const auto tf = trace_and_frobenius(gen_factor(spec).factor);
  CHECK(tf.frob / tf.trace == doctest::Approx(0.1010).epsilon(0.15));
}

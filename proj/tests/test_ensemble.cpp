#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsketch/datagen.hpp"
#include "hsketch/ensemble.hpp"
#include "hsketch/error.hpp"
#include "support/tiny_oracle.hpp"

#include <cmath>

using namespace hsketch;

TEST_CASE("identity factor without replacement is perfectly conditioned") {
  const GramFactor f(DenseMatrix::Identity(20, 20));
  EnsembleConfig cfg;
  cfg.m = 7;
  cfg.trials = 200;
  cfg.mode = SamplingMode::kWithoutReplacement;
  const auto rep = run_condition_ensemble(f, cfg);
  for (const auto& rec : rep.records) {
    CHECK(rec.cond == doctest::Approx(1.0));
    CHECK(rec.hollow_norm == 0.0);
  }
  CHECK(rep.failure_prob == 0.0);
  CHECK(rep.rank_histograms.at(0).counts.at(7) == 200);
  for (const auto& m : rep.moments) CHECK(m.estimate == 0.0);
  CHECK(rep.tail_event_fraction.value() == 1.0);
}

TEST_CASE("identity factor with replacement stays under the moment bound") {
  // Duplicated indices put ones off the diagonal; enumerate N=4, m=3.
  const GramFactor f(DenseMatrix::Identity(4, 4));
  const auto s = summarize(f);
  double exact_p2 = 0.0;
  std::size_t outcomes = 0;
  oracle::for_each_selector(4, 3, [&](const std::vector<std::size_t>& idx) {
    oracle::Mat h(3, std::vector<double>(3, 0.0));
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b)
        if (a != b && idx[a] == idx[b]) h[a][b] = 1.0;
    const auto ev = oracle::jacobi_eigenvalues(h);
    const double norm = std::max(std::abs(ev.front()), std::abs(ev.back()));
    exact_p2 += norm * norm;
    ++outcomes;
  });
  exact_p2 = std::sqrt(exact_p2 / static_cast<double>(outcomes));
  const auto est = moment_estimate(f, 3, 2, 40000, 5);
  CHECK(est.estimate == doctest::Approx(exact_p2).epsilon(0.03));
  CHECK(est.estimate <= est.bound);
}

TEST_CASE("tiny factor ensemble matches exact enumeration") {
  const auto phi = oracle::tiny_phi();
  const GramFactor f(oracle::to_dense(phi));
  const auto s = summarize(f);
  const double threshold = s.big_l / s.ell;
  const std::vector<double> ths{1e-6, 1e-2};
  const auto exact = oracle::exact_ensemble(phi, 2, threshold, kDefaultRankTol, ths);
  REQUIRE(exact.outcomes == 36);

  EnsembleConfig cfg;
  cfg.m = 2;
  cfg.trials = 100'000;
  cfg.seed = 3;
  const auto rep = run_condition_ensemble(f, s, cfg);

  CHECK(std::abs(rep.failure_prob - exact.failure_prob) <=
        3 * oracle::binomial_sigma(exact.failure_prob, cfg.trials));

  const double n_finite = exact.finite_fraction * cfg.trials;
  const double mean_sigma = std::sqrt(exact.var_finite_cond / n_finite);
  CHECK(std::abs(mean_finite_cond(rep.records) - exact.mean_finite_cond) <= 3 * mean_sigma);

  for (double th : ths) {
    const auto hist = rank_histogram(rep.records, th);
    for (const auto& [rank, p] : exact.rank_prob.at(th)) {
      const auto it = hist.find(rank);
      const double got = it == hist.end() ? 0.0 : static_cast<double>(it->second) / cfg.trials;
      CHECK(std::abs(got - p) <= 3 * oracle::binomial_sigma(p, cfg.trials) + 1e-12);
    }
  }
}

TEST_CASE("evaluate_trial agrees with the Jacobi oracle") {
  const auto phi = oracle::random_phi(30, 8, 17);
  const auto h = oracle::naive_hessian(phi);
  const GramFactor f(oracle::to_dense(phi));
  SplitMix64 rng(4);
  for (int k = 0; k < 30; ++k) {
    const auto sel = draw_uniform_selector(30, 5, rng, SamplingMode::kWithoutReplacement);
    const auto ref = oracle::sketch_outcome(h, sel.indices, kDefaultRankTol, {1e-6, 1e-2});
    const auto rec = evaluate_trial(f, k, sel, kDefaultRankTol, {1e-6, 1e-2});
    CHECK(rec.cond == doctest::Approx(ref.cond).epsilon(1e-8));
    CHECK(rec.rank_at.at(1e-6) == ref.rank_at.at(1e-6));
    CHECK(rec.rank_at.at(1e-2) == ref.rank_at.at(1e-2));
  }
}

TEST_CASE("failure_probability and rank_histogram helpers") {
  std::vector<TrialRecord> recs(4);
  for (auto& r : recs) {
    r.cond = 1.0;
    r.rank_at[1e-6] = 3;
  }
  CHECK(failure_probability(recs, 2.0) == 0.0);
  recs[0].cond = kInfinity;
  recs[1].cond = 2.5;
  CHECK(failure_probability(recs, 2.0) == 0.5);
  CHECK(mean_finite_cond(recs) == doctest::Approx((2.5 + 1 + 1) / 3));
  CHECK(rank_histogram(recs, 1e-6).at(3) == 4);
  CHECK_THROWS_AS(rank_histogram(recs, 1e-3), ContractError);
}

TEST_CASE("coarser rank threshold never adds full-rank mass") {
  SyntheticSpec spec;
  spec.n = 400;
  spec.r = 12;
  spec.seed = 2;
  const auto f = gen_factor(spec).factor;
  EnsembleConfig cfg;
  cfg.m = 10;
  cfg.trials = 500;
  const auto rep = run_condition_ensemble(f, cfg);
  const auto fine = rank_histogram(rep.records, 1e-6);
  const auto coarse = rank_histogram(rep.records, 1e-2);
  const auto at = [](const std::map<std::size_t, std::size_t>& h, std::size_t k) {
    const auto it = h.find(k);
    return it == h.end() ? std::size_t{0} : it->second;
  };
  CHECK(at(coarse, 10) <= at(fine, 10));
  for (const auto& rec : rep.records) CHECK(rec.rank_at.at(1e-2) <= rec.rank_at.at(1e-6));
}

TEST_CASE("reports do not depend on the thread count") {
  SyntheticSpec spec;
  spec.n = 300;
  spec.r = 20;
  spec.seed = 6;
  const auto f = gen_factor(spec).factor;
  EnsembleConfig cfg;
  cfg.m = 8;
  cfg.trials = 777;
  cfg.seed = 9;
  cfg.threads = 1;
  const auto a = run_condition_ensemble(f, cfg);
  cfg.threads = 4;
  const auto b = run_condition_ensemble(f, cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t t = 0; t < a.records.size(); ++t) {
    CHECK(a.records[t].selector.indices == b.records[t].selector.indices);
    CHECK(a.records[t].cond == b.records[t].cond);
  }
  CHECK(a.cond_q50 == b.cond_q50);
  CHECK(a.moments.at(2).estimate == b.moments.at(2).estimate);
}

TEST_CASE("moment estimates are nondecreasing in p and below the bound") {
  SyntheticSpec spec;
  spec.n = 500;
  spec.r = 50;
  spec.seed = 1;
  const auto f = gen_factor(spec).factor;
  const auto s = summarize(f);
  const auto est = moment_estimates(f, s, 10, {2, 4, 8}, 2000, 3);
  for (std::size_t k = 0; k < est.size(); ++k) {
    CHECK(est[k].estimate <= est[k].bound);
    if (k > 0) CHECK(est[k].estimate >= est[k - 1].estimate);
  }
  CHECK_THROWS_AS(moment_bound(s, 10, 1), ContractError);
}

TEST_CASE("tail probability does not drop when m is halved") {
  SyntheticSpec spec;
  spec.n = 2000;
  spec.r = 100;
  spec.seed = 4;
  const auto f = gen_factor(spec).factor;
  const auto big = tail_check(f, 20, 100, 3000, 8);
  const auto small = tail_check(f, 10, 100, 3000, 8);
  CHECK(small.target == doctest::Approx(0.99));
  CHECK(small.probability + 3 * oracle::binomial_sigma(0.5, 3000) >= big.probability);
}

TEST_CASE("ensemble rejects bad configs") {
  const GramFactor f(DenseMatrix::Identity(5, 5));
  EnsembleConfig cfg;
  cfg.trials = 0;
  CHECK_THROWS_AS(run_condition_ensemble(f, cfg), ContractError);
  cfg.trials = 10;
  cfg.m = 6;
  cfg.mode = SamplingMode::kWithoutReplacement;
  CHECK_THROWS_AS(run_condition_ensemble(f, cfg), ContractError);
  cfg.m = 2;
  cfg.rank_thresholds = {2.0};
  CHECK_THROWS_AS(run_condition_ensemble(f, cfg), ContractError);
}

TEST_CASE("resolve_threads honours an explicit request") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads() >= 1);
}

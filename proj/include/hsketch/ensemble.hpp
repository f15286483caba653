#pragma once

#include "hsketch/bounds.hpp"
#include "hsketch/sketch.hpp"
#include "hsketch/spectral.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace hsketch {

/// Worker count: `requested` if nonzero, else HESSSKETCH_THREADS if set and
/// positive, else std::thread::hardware_concurrency().
unsigned resolve_threads(unsigned requested = 0);

struct EnsembleConfig {
  std::size_t m = 10;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::kWithReplacement;
  /// Relative cut below which lambda_min counts as zero (cond = inf).
  double cond_rank_tol = kDefaultRankTol;
  std::vector<double> rank_thresholds{1e-6, 1e-2};
  /// Failure threshold on cond; L/ell of the base Hessian when unset.
  std::optional<double> failure_threshold;
  double eta = 0.2;
  std::vector<int> moment_orders{2, 4, 8};
  unsigned threads = 0;
};

struct TrialRecord {
  std::size_t trial_id = 0;
  SketchSelector selector;
  double cond = 0.0;
  std::map<double, std::size_t> rank_at;
  double min_diag = 0.0;
  double max_diag = 0.0;
  double hollow_norm = 0.0;  // ||M_s||_2
};

struct MomentEstimate {
  int p = 2;
  double estimate = 0.0;  // (mean ||M_s||_2^p)^{1/p}
  double bound = 0.0;     // closed-form moment bound
};

struct TailCheck {
  double probability = 0.0;  // fraction with ||M_s||_2 <= Tr/N tau(m)
  double target = 0.0;       // 1 - 1/r
  double level = 0.0;        // Tr/N tau(m)
  std::size_t trials = 0;
};

struct RankHistogram {
  double threshold = 0.0;
  std::map<std::size_t, std::size_t> counts;
};

struct EnsembleReport {
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t m = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::kWithReplacement;
  double cond_rank_tol = 0.0;

  SpectralSummary summary;
  std::optional<TheoremReport> theorem;  // needs r >= 2

  double cond_q20 = 0.0;
  double cond_q50 = 0.0;
  double cond_q80 = 0.0;
  double failure_threshold = 0.0;
  double failure_prob = 0.0;
  std::vector<RankHistogram> rank_histograms;
  std::vector<MomentEstimate> moments;
  double eta = 0.0;
  double ell0 = 0.0;
  double big_l0 = 0.0;
  /// Fraction of trials with cond <= theorem threshold, and with
  /// ||M_s||_2 <= Tr/N tau(m). Present when `theorem` is.
  std::optional<double> theorem_event_fraction;
  std::optional<double> tail_event_fraction;

  std::vector<TrialRecord> records;
};

/// One sketch evaluated in full.
TrialRecord evaluate_trial(const GramFactor& f, std::size_t trial_id, SketchSelector selector,
                           double cond_rank_tol, const std::vector<double>& rank_thresholds);

/// Runs `cfg.trials` independent sketches. Trial t samples from
/// trial_stream(cfg.seed, t), so the report does not depend on the thread count.
EnsembleReport run_condition_ensemble(const GramFactor& f, const EnsembleConfig& cfg);

/// Same, reusing an already computed summary of `f`.
EnsembleReport run_condition_ensemble(const GramFactor& f, const SpectralSummary& summary,
                                      const EnsembleConfig& cfg);

/// Fraction of records with cond > threshold; infinite cond always fails.
double failure_probability(const std::vector<TrialRecord>& records, double threshold);

/// rank -> number of trials. `threshold` must be one the records were built with.
std::map<std::size_t, std::size_t> rank_histogram(const std::vector<TrialRecord>& records,
                                                  double threshold);

/// Mean of the finite condition numbers; NaN if none are finite.
double mean_finite_cond(const std::vector<TrialRecord>& records);

/// Closed-form bound on (E ||M_s||_2^p)^{1/p}:
/// (2m/N)||H||_2 + 12 sqrt(max(log m, p/2)) mu (sqrt(m)/N) ||H||_F.
double moment_bound(const SpectralSummary& s, std::size_t m, int p);

MomentEstimate moment_estimate(const GramFactor& f, std::size_t m, int p, std::size_t trials,
                               std::uint64_t seed,
                               SamplingMode mode = SamplingMode::kWithReplacement,
                               unsigned threads = 0);

/// Moment estimates for several orders from one shared set of sketches.
std::vector<MomentEstimate> moment_estimates(const GramFactor& f, const SpectralSummary& s,
                                             std::size_t m, const std::vector<int>& orders,
                                             std::size_t trials, std::uint64_t seed,
                                             SamplingMode mode = SamplingMode::kWithReplacement,
                                             unsigned threads = 0);

TailCheck tail_check(const GramFactor& f, std::size_t m, std::size_t r, std::size_t trials,
                     std::uint64_t seed, SamplingMode mode = SamplingMode::kWithReplacement,
                     unsigned threads = 0);

}  // namespace hsketch

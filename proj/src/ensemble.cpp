#include "hsketch/ensemble.hpp"

#include "hsketch/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

namespace hsketch {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HESSSKETCH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

double hollow_spectral_norm(const DenseMatrix& h_s) {
  if (h_s.rows() == 1) return 0.0;
  const Spectrum sp = sym_eigenvalues(hollow_part(h_s));
  return std::max(std::abs(sp.largest()), std::abs(sp.smallest()));
}

std::vector<double> sample_hollow_norms(const GramFactor& f, std::size_t m,
                                        std::size_t trials, std::uint64_t seed,
                                        SamplingMode mode, unsigned threads) {
  if (trials < 1) throw ContractError("trials must be >= 1");
  std::vector<double> norms(trials);
  detail::parallel_for(trials, resolve_threads(threads), [&](std::size_t t) {
    SplitMix64 rng = trial_stream(seed, t);
    const SketchSelector sel = draw_uniform_selector(f.n(), m, rng, mode);
    norms[t] = hollow_spectral_norm(sketch_hessian(f, sel));
  });
  return norms;
}

double power_mean(const std::vector<double>& values, int p) {
  // Fixed summation order keeps the result thread-count independent.
  double acc = 0.0;
  for (double v : values) acc += std::pow(v, p);
  return std::pow(acc / static_cast<double>(values.size()), 1.0 / p);
}

void check_order(int p) {
  if (p < 2) throw ContractError("moment order p must be >= 2, got " + std::to_string(p));
}

}  // namespace

TrialRecord evaluate_trial(const GramFactor& f, std::size_t trial_id, SketchSelector selector,
                           double cond_rank_tol, const std::vector<double>& rank_thresholds) {
  TrialRecord rec;
  rec.trial_id = trial_id;
  const DenseMatrix h_s = sketch_hessian(f, selector);
  rec.selector = std::move(selector);
  const Spectrum sp = sym_eigenvalues(h_s);
  rec.cond = condition_number(sp, cond_rank_tol);
  for (double th : rank_thresholds) rec.rank_at[th] = numerical_rank(sp, th);
  rec.min_diag = h_s.diagonal().minCoeff();
  rec.max_diag = h_s.diagonal().maxCoeff();
  rec.hollow_norm = hollow_spectral_norm(h_s);
  return rec;
}

EnsembleReport run_condition_ensemble(const GramFactor& f, const EnsembleConfig& cfg) {
  return run_condition_ensemble(f, summarize(f), cfg);
}

EnsembleReport run_condition_ensemble(const GramFactor& f, const SpectralSummary& summary,
                                      const EnsembleConfig& cfg) {
  if (cfg.trials < 1) throw ContractError("run_condition_ensemble: trials must be >= 1");
  if (cfg.m < 1) throw ContractError("run_condition_ensemble: m must be >= 1");
  for (double th : cfg.rank_thresholds)
    if (!(th > 0.0 && th < 1.0))
      throw ContractError("run_condition_ensemble: rank thresholds must lie in (0,1)");
  for (int p : cfg.moment_orders) check_order(p);

  EnsembleReport rep;
  rep.n = f.n();
  rep.r = f.r();
  rep.m = cfg.m;
  rep.trials = cfg.trials;
  rep.seed = cfg.seed;
  rep.mode = cfg.mode;
  rep.cond_rank_tol = cfg.cond_rank_tol;
  rep.summary = summary;
  rep.eta = cfg.eta;

  rep.records.resize(cfg.trials);
  detail::parallel_for(cfg.trials, resolve_threads(cfg.threads), [&](std::size_t t) {
    SplitMix64 rng = trial_stream(cfg.seed, t);
    rep.records[t] = evaluate_trial(f, t, draw_uniform_selector(f.n(), cfg.m, rng, cfg.mode),
                                    cfg.cond_rank_tol, cfg.rank_thresholds);
  });

  std::vector<double> conds, mins, maxs, norms;
  conds.reserve(cfg.trials);
  mins.reserve(cfg.trials);
  maxs.reserve(cfg.trials);
  norms.reserve(cfg.trials);
  for (const auto& rec : rep.records) {
    conds.push_back(rec.cond);
    mins.push_back(rec.min_diag);
    maxs.push_back(rec.max_diag);
    norms.push_back(rec.hollow_norm);
  }
  rep.cond_q20 = nearest_rank_quantile(conds, 0.2);
  rep.cond_q50 = nearest_rank_quantile(conds, 0.5);
  rep.cond_q80 = nearest_rank_quantile(conds, 0.8);

  rep.failure_threshold = cfg.failure_threshold.value_or(summary.big_l / summary.ell);
  rep.failure_prob = failure_probability(rep.records, rep.failure_threshold);
  for (double th : cfg.rank_thresholds)
    rep.rank_histograms.push_back({th, rank_histogram(rep.records, th)});

  for (int p : cfg.moment_orders)
    rep.moments.push_back({p, power_mean(norms, p), moment_bound(summary, cfg.m, p)});

  const double trace_over_n = summary.trace / static_cast<double>(summary.n);
  const auto refined = refined_quantile_params(mins, maxs, cfg.eta, trace_over_n);
  rep.ell0 = refined.ell0;
  rep.big_l0 = refined.big_l0;

  if (summary.r >= 2) {
    rep.theorem = condition_threshold(summary, cfg.m, summary.r);
    const double level = trace_over_n * rep.theorem->tau;
    std::size_t cond_ok = 0, tail_ok = 0;
    for (const auto& rec : rep.records) {
      if (rec.cond <= rep.theorem->threshold) ++cond_ok;
      if (rec.hollow_norm <= level) ++tail_ok;
    }
    const double total = static_cast<double>(cfg.trials);
    rep.theorem_event_fraction = static_cast<double>(cond_ok) / total;
    rep.tail_event_fraction = static_cast<double>(tail_ok) / total;
  }
  return rep;
}

double failure_probability(const std::vector<TrialRecord>& records, double threshold) {
  if (records.empty()) return 0.0;
  const auto fails = std::count_if(records.begin(), records.end(),
                                   [threshold](const TrialRecord& r) { return !(r.cond <= threshold); });
  return static_cast<double>(fails) / static_cast<double>(records.size());
}

std::map<std::size_t, std::size_t> rank_histogram(const std::vector<TrialRecord>& records,
                                                  double threshold) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& rec : records) {
    const auto it = rec.rank_at.find(threshold);
    if (it == rec.rank_at.end())
      throw ContractError("rank_histogram: records carry no rank at threshold " +
                          std::to_string(threshold));
    ++hist[it->second];
  }
  return hist;
}

double mean_finite_cond(const std::vector<TrialRecord>& records) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& rec : records) {
    if (std::isfinite(rec.cond)) {
      sum += rec.cond;
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

double moment_bound(const SpectralSummary& s, std::size_t m, int p) {
  check_order(p);
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(s.n);
  const double lead = std::sqrt(std::max(std::log(md), p / 2.0));
  return 2.0 * md / nd * s.snorm + 12.0 * lead * s.mu * std::sqrt(md) / nd * s.frob;
}

MomentEstimate moment_estimate(const GramFactor& f, std::size_t m, int p, std::size_t trials,
                               std::uint64_t seed, SamplingMode mode, unsigned threads) {
  return moment_estimates(f, summarize(f), m, {p}, trials, seed, mode, threads).front();
}

std::vector<MomentEstimate> moment_estimates(const GramFactor& f, const SpectralSummary& s,
                                             std::size_t m, const std::vector<int>& orders,
                                             std::size_t trials, std::uint64_t seed,
                                             SamplingMode mode, unsigned threads) {
  for (int p : orders) check_order(p);
  const auto norms = sample_hollow_norms(f, m, trials, seed, mode, threads);
  std::vector<MomentEstimate> out;
  for (int p : orders) out.push_back({p, power_mean(norms, p), moment_bound(s, m, p)});
  return out;
}

TailCheck tail_check(const GramFactor& f, std::size_t m, std::size_t r, std::size_t trials,
                     std::uint64_t seed, SamplingMode mode, unsigned threads) {
  const SpectralSummary s = summarize(f);
  TailCheck out;
  out.trials = trials;
  out.target = 1.0 - 1.0 / static_cast<double>(r);
  out.level = s.trace / static_cast<double>(s.n) * distortion(s, m, r);
  const auto norms = sample_hollow_norms(f, m, trials, seed, mode, threads);
  const auto ok = std::count_if(norms.begin(), norms.end(),
                                [&](double v) { return v <= out.level; });
  out.probability = static_cast<double>(ok) / static_cast<double>(trials);
  return out;
}

}  // namespace hsketch

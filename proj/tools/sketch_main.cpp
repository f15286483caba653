// sketch: experiment driver for uniform row-subsampling of Gauss-Newton
// Hessians. Every subcommand writes plot-ready CSV plus a JSON report that
// embeds the full experiment configuration.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical degeneracy,
// 4 I/O or format error.

#include "hsketch/bounds.hpp"
#include "hsketch/datagen.hpp"
#include "hsketch/elliptic.hpp"
#include "hsketch/ensemble.hpp"
#include "hsketch/error.hpp"
#include "hsketch/io.hpp"
#include "hsketch/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hsketch;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDegenerate = 3, kIoError = 4 };

struct FactorSource {
  std::string from_factor;
  std::string dist = "gaussian";
  std::size_t n = 5000;
  std::size_t r = 50;
  std::optional<std::uint64_t> data_seed;
  double bernoulli_p = 0.5;
};

struct SamplingOptions {
  std::vector<std::size_t> m_list{10};
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  std::string mode = "with-replacement";
  double cond_rank_tol = kDefaultRankTol;
  std::vector<double> rank_thresholds{1e-6, 1e-2};
  std::optional<double> failure_threshold;
  double eta = 0.2;
  std::vector<int> moment_orders{2, 4, 8};
  bool records = true;
};

struct CommonOptions {
  std::string out = ".";
  unsigned threads = 0;
};

void add_factor_options(CLI::App* cmd, FactorSource& src) {
  cmd->add_option("--from-factor", src.from_factor, "Load phi from an HSK1 factor file");
  cmd->add_option("--dist", src.dist, "Synthetic entry distribution")
      ->check(CLI::IsMember({"gaussian", "uniform01", "uniform", "bernoulli01", "bernoulli"}));
  cmd->add_option("--n", src.n, "Rows N of the synthetic factor");
  cmd->add_option("--r", src.r, "Columns r of the synthetic factor");
  cmd->add_option("--data-seed", src.data_seed, "Seed of the synthetic factor (default: --seed)");
  cmd->add_option("--bernoulli-p", src.bernoulli_p, "Success probability of bernoulli01 entries");
}

void add_sampling_options(CLI::App* cmd, SamplingOptions& s, bool with_m_list = true) {
  if (with_m_list)
    cmd->add_option("--m", s.m_list, "Sample sizes, comma separated")->delimiter(',');
  cmd->add_option("--trials", s.trials, "Independent sketches per sample size");
  cmd->add_option("--seed", s.seed, "Experiment seed");
  cmd->add_option("--mode", s.mode, "Sampling mode")
      ->check(CLI::IsMember({"with-replacement", "without-replacement"}));
  cmd->add_option("--cond-rank-tol", s.cond_rank_tol,
                  "lambda_min below this fraction of lambda_1 counts as singular");
  cmd->add_option("--rank-thresholds", s.rank_thresholds, "Rank-histogram thresholds")
      ->delimiter(',');
  cmd->add_option("--failure-threshold", s.failure_threshold,
                  "Condition-number failure threshold (default L/ell)");
  cmd->add_option("--eta", s.eta, "Failure probability of the refined diagonal cut-offs");
  cmd->add_option("--p", s.moment_orders, "Moment orders, comma separated")->delimiter(',');
  cmd->add_option("--records", s.records, "Write per-trial CSV files");
}

void add_common_options(CLI::App* cmd, CommonOptions& c) {
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--threads", c.threads, "Worker threads (default HESSSKETCH_THREADS)");
}

// Validation runs before any computation.
void require(bool ok, const std::string& message) {
  if (!ok) throw CLI::ValidationError(message);
}

void validate(const FactorSource& src) {
  if (!src.from_factor.empty()) return;
  require(src.r >= 1 && src.n >= src.r, "need n >= r >= 1");
  require(src.bernoulli_p > 0.0 && src.bernoulli_p <= 1.0, "--bernoulli-p must lie in (0,1]");
}

void validate(const SamplingOptions& s, bool needs_m = true) {
  if (needs_m) {
    require(!s.m_list.empty(), "--m needs at least one sample size");
    for (auto m : s.m_list) require(m >= 1, "sample sizes must be >= 1");
  }
  require(s.trials >= 1, "--trials must be >= 1");
  require(s.cond_rank_tol > 0.0 && s.cond_rank_tol < 1.0, "--cond-rank-tol must lie in (0,1)");
  for (double t : s.rank_thresholds)
    require(t > 0.0 && t < 1.0, "rank thresholds must lie in (0,1)");
  require(s.eta > 0.0 && s.eta <= 0.5, "--eta must lie in (0, 1/2]");
  for (int p : s.moment_orders) require(p >= 2, "moment orders must be >= 2");
  if (s.failure_threshold) require(*s.failure_threshold > 0.0, "--failure-threshold must be > 0");
}

void validate_against(const GramFactor& f, const SamplingOptions& s) {
  if (parse_sampling_mode(s.mode) == SamplingMode::kWithoutReplacement)
    for (auto m : s.m_list)
      require(m <= f.n(), "m=" + std::to_string(m) + " exceeds N=" + std::to_string(f.n()) +
                              " without replacement");
}

json provenance(const FactorSource& src) {
  json j;
  if (!src.from_factor.empty()) {
    j["from_factor"] = fs::path(src.from_factor).filename().string();
  } else {
    j["dist"] = std::string(to_string(parse_distribution(src.dist)));
    j["n"] = src.n;
    j["r"] = src.r;
    j["bernoulli_p"] = src.bernoulli_p;
  }
  return j;
}

json provenance(const SamplingOptions& s) {
  json j{{"m", s.m_list},
         {"trials", s.trials},
         {"seed", s.seed},
         {"mode", std::string(to_string(parse_sampling_mode(s.mode)))},
         {"cond_rank_tol", io::number(s.cond_rank_tol)},
         {"rank_thresholds", s.rank_thresholds},
         {"eta", io::number(s.eta)},
         {"moment_orders", s.moment_orders}};
  j["failure_threshold"] = s.failure_threshold ? io::number(*s.failure_threshold) : json("L/ell");
  return j;
}

struct LoadedFactor {
  GramFactor factor;
  json info;
};

LoadedFactor load_source(const FactorSource& src, std::uint64_t fallback_seed) {
  if (!src.from_factor.empty()) return {io::load_factor(src.from_factor), json::object()};
  SyntheticSpec spec;
  spec.n = src.n;
  spec.r = src.r;
  spec.distribution = parse_distribution(src.dist);
  spec.seed = src.data_seed.value_or(fallback_seed);
  spec.bernoulli_p = src.bernoulli_p;
  auto gen = gen_factor(spec);
  return {std::move(gen.factor), json{{"data_seed", spec.seed}, {"redrawn_rows", gen.redrawn_rows}}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

void write_json(const fs::path& path, const json& j) { io::write_text(path, j.dump(2) + "\n"); }

template <class Fn>
void write_csv(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  io::write_text(path, ss.str());
}

EnsembleConfig ensemble_config(const SamplingOptions& s, std::size_t m, unsigned threads) {
  EnsembleConfig cfg;
  cfg.m = m;
  cfg.trials = s.trials;
  cfg.seed = s.seed;
  cfg.mode = parse_sampling_mode(s.mode);
  cfg.cond_rank_tol = s.cond_rank_tol;
  cfg.rank_thresholds = s.rank_thresholds;
  cfg.failure_threshold = s.failure_threshold;
  cfg.eta = s.eta;
  cfg.moment_orders = s.moment_orders;
  cfg.threads = threads;
  return cfg;
}

/// Runs the ensemble for every m; writes ensemble_m<m>.{json,csv} and a
/// per-m overview table. Returns the overview rows as JSON.
json run_ensembles(const GramFactor& f, const SpectralSummary& summary, const SamplingOptions& s,
                   const CommonOptions& c, const json& experiment) {
  const fs::path out(c.out);
  std::ostringstream table;
  table << "m,q20,q50,q80,failure_threshold,failure_prob,theorem_event_fraction,"
           "tail_event_fraction,ell0,L0\n";
  json overview = json::array();
  for (auto m : s.m_list) {
    const auto rep = run_condition_ensemble(f, summary, ensemble_config(s, m, c.threads));
    json doc{{"experiment", experiment}, {"report", io::to_json(rep)}};
    const std::string stem = "ensemble_m" + std::to_string(m);
    write_json(out / (stem + ".json"), doc);
    if (s.records)
      write_csv(out / (stem + ".csv"), [&](std::ostream& os) { io::write_ensemble_csv(os, rep.records); });
    auto opt = [](const std::optional<double>& v) {
      return v ? io::format_number(*v) : std::string();
    };
    table << m << ',' << io::format_number(rep.cond_q20) << ',' << io::format_number(rep.cond_q50)
          << ',' << io::format_number(rep.cond_q80) << ','
          << io::format_number(rep.failure_threshold) << ','
          << io::format_number(rep.failure_prob) << ',' << opt(rep.theorem_event_fraction) << ','
          << opt(rep.tail_event_fraction) << ',' << io::format_number(rep.ell0) << ','
          << io::format_number(rep.big_l0) << '\n';
    overview.push_back({{"m", m},
                        {"cond_quantiles", doc["report"]["cond_quantiles"]},
                        {"failure", doc["report"]["failure"]}});
  }
  io::write_text(out / "ensemble_overview.csv", table.str());
  return overview;
}

void write_summary(const fs::path& out, const SpectralSummary& summary, const json& experiment) {
  write_json(out / "summary.json", {{"experiment", experiment}, {"summary", io::to_json(summary)}});
  write_csv(out / "summary.csv", [&](std::ostream& os) { io::write_summary_csv(os, summary); });
}

int cmd_synthetic(const FactorSource& src, std::uint64_t seed, bool save, const CommonOptions& c) {
  auto loaded = load_source(src, seed);
  const fs::path out(c.out);
  ensure_dir(out);
  json experiment{{"command", "synthetic"}, {"factor", provenance(src)}, {"seed", seed},
                  {"generation", loaded.info}};
  const auto summary = summarize(loaded.factor);
  write_summary(out, summary, experiment);
  if (save) io::save_factor(out / "phi.hsk", loaded.factor);
  std::cout << io::to_json(summary).dump(2) << '\n';
  return kOk;
}

int cmd_ensemble(const FactorSource& src, const SamplingOptions& s, const CommonOptions& c) {
  auto loaded = load_source(src, s.seed);
  validate_against(loaded.factor, s);
  ensure_dir(c.out);
  json experiment{{"command", "ensemble"},
                  {"factor", provenance(src)},
                  {"generation", loaded.info},
                  {"sampling", provenance(s)}};
  const auto summary = summarize(loaded.factor);
  write_summary(c.out, summary, experiment);
  const auto overview = run_ensembles(loaded.factor, summary, s, c, experiment);
  std::cout << overview.dump(2) << '\n';
  return kOk;
}

int cmd_bounds(const FactorSource& src, const std::vector<std::size_t>& m_list,
               std::uint64_t seed, const CommonOptions& c) {
  auto loaded = load_source(src, seed);
  ensure_dir(c.out);
  const auto summary = summarize(loaded.factor);
  require(summary.r >= 2, "bounds need r >= 2 (log r must be positive)");
  std::vector<TheoremReport> rows;
  json reports = json::array();
  for (auto m : m_list) {
    rows.push_back(condition_threshold(summary, m, summary.r));
    reports.push_back(io::to_json(rows.back()));
  }
  json experiment{{"command", "bounds"}, {"factor", provenance(src)}, {"generation", loaded.info},
                  {"m", m_list}, {"seed", seed}};
  json doc{{"experiment", experiment},
           {"summary", io::to_json(summary)},
           {"m_max", io::number(max_sample_size(summary, summary.r))},
           {"bounds", reports}};
  write_json(fs::path(c.out) / "bounds.json", doc);
  write_csv(fs::path(c.out) / "bounds.csv", [&](std::ostream& os) { io::write_bounds_csv(os, rows); });
  std::cout << doc["bounds"].dump(2) << '\n';
  return kOk;
}

int cmd_moments(const FactorSource& src, const SamplingOptions& s, const CommonOptions& c) {
  auto loaded = load_source(src, s.seed);
  validate_against(loaded.factor, s);
  ensure_dir(c.out);
  const auto summary = summarize(loaded.factor);
  const auto mode = parse_sampling_mode(s.mode);
  json rows = json::array();
  std::ostringstream table;
  table << "m,p,estimate,bound,tail_probability,tail_target,tail_level\n";
  for (auto m : s.m_list) {
    const auto est = moment_estimates(loaded.factor, summary, m, s.moment_orders, s.trials, s.seed,
                                      mode, c.threads);
    std::optional<TailCheck> tail;
    if (summary.r >= 2)
      tail = tail_check(loaded.factor, m, summary.r, s.trials, s.seed, mode, c.threads);
    for (const auto& e : est) {
      json row{{"m", m}, {"p", e.p}, {"estimate", io::number(e.estimate)},
               {"bound", io::number(e.bound)}};
      table << m << ',' << e.p << ',' << io::format_number(e.estimate) << ','
            << io::format_number(e.bound) << ',';
      if (tail) {
        row["tail"] = {{"probability", io::number(tail->probability)},
                       {"target", io::number(tail->target)},
                       {"level", io::number(tail->level)}};
        table << io::format_number(tail->probability) << ',' << io::format_number(tail->target)
              << ',' << io::format_number(tail->level);
      } else {
        table << ",,";
      }
      table << '\n';
      rows.push_back(row);
    }
  }
  json experiment{{"command", "moments"}, {"factor", provenance(src)}, {"generation", loaded.info},
                  {"sampling", provenance(s)}};
  write_json(fs::path(c.out) / "moments.json",
             {{"experiment", experiment}, {"summary", io::to_json(summary)}, {"moments", rows}});
  io::write_text(fs::path(c.out) / "moments.csv", table.str());
  std::cout << rows.dump(2) << '\n';
  return kOk;
}

struct EllipticOptions {
  std::string preset;
  std::size_t nodes_per_side = 65;
  std::string domain = "D1";
  double source_fraction = 1.0 / 6.0;
  std::size_t detector_radius = 5;
  std::size_t detectors_per_source = 0;
  bool half_open = false;
  std::uint64_t layout_seed = 0;
  std::string averaging = "arithmetic";
  bool run_ensemble = false;
};

int cmd_elliptic(EllipticOptions e, SamplingOptions s, CLI::App* cmd, const CommonOptions& c) {
  elliptic::LayoutOptions lo;
  if (!e.preset.empty()) {
    const auto preset = elliptic::layout_preset(e.preset);
    lo = preset.layout;
    if (cmd->count("--nodes-per-side") == 0) e.nodes_per_side = preset.nodes_per_side;
    if (cmd->count("--mode") == 0) s.mode = std::string(to_string(preset.sampling));
    // Explicit flags still override preset fields.
    if (cmd->count("--source-fraction")) lo.source_fraction = e.source_fraction;
    if (cmd->count("--detector-radius")) lo.detector_radius = e.detector_radius;
    if (cmd->count("--detectors-per-source")) lo.detectors_per_source = e.detectors_per_source;
    if (cmd->count("--layout-seed")) lo.seed = e.layout_seed;
  } else {
    lo.domain = elliptic::parse_domain(e.domain);
    lo.source_fraction = e.source_fraction;
    lo.detector_radius = e.detector_radius;
    lo.detectors_per_source = e.detectors_per_source;
    lo.edges = e.half_open ? elliptic::DomainEdges::kHalfOpen : elliptic::DomainEdges::kClosed;
    lo.seed = e.layout_seed;
  }
  require(e.nodes_per_side >= 3, "--nodes-per-side must be >= 3");
  require(lo.source_fraction > 0.0 && lo.source_fraction <= 1.0,
          "--source-fraction must lie in (0,1]");
  if (e.run_ensemble) validate(s);

  const elliptic::Grid2D grid{e.nodes_per_side};
  const auto averaging = e.averaging == "harmonic" ? elliptic::FaceAveraging::kHarmonic
                                                   : elliptic::FaceAveraging::kArithmetic;
  const auto media = elliptic::shepp_logan_media(grid);
  const auto system = elliptic::assemble_operator(grid, media, averaging);
  const auto layout = elliptic::build_layout(grid, lo);
  require(layout.r() >= 1, "layout produced no measurement pairs");
  const auto sens = elliptic::assemble_sensitivity_factor(system, layout, c.threads);
  const auto restricted = elliptic::drop_insensitive_rows(sens.factor);

  const fs::path out(c.out);
  ensure_dir(out);
  io::save_factor(out / "phi.hsk", sens.factor);
  io::save_factor(out / "phi_sensitive.hsk", restricted.factor);
  write_json(out / "layout.json", io::to_json(layout));
  write_csv(out / "media.csv", [&](std::ostream& os) {
    os << "node,i,j,x,y,sigma\n";
    for (std::size_t node = 0; node < grid.node_count(); ++node)
      os << node << ',' << grid.col(node) << ',' << grid.row(node) << ','
         << io::format_number(static_cast<double>(grid.col(node)) * grid.h()) << ','
         << io::format_number(static_cast<double>(grid.row(node)) * grid.h()) << ','
         << io::format_number(media.sigma[node]) << '\n';
  });

  json experiment{{"command", "elliptic"},
                  {"preset", e.preset.empty() ? json(nullptr) : json(e.preset)},
                  {"nodes_per_side", e.nodes_per_side},
                  {"averaging", e.averaging},
                  {"layout", {{"domain", std::string(elliptic::to_string(lo.domain))},
                              {"source_fraction", io::number(lo.source_fraction)},
                              {"detector_radius", lo.detector_radius},
                              {"detectors_per_source", lo.detectors_per_source},
                              {"edges", lo.edges == elliptic::DomainEdges::kClosed ? "closed"
                                                                                   : "half-open"},
                              {"seed", lo.seed}}},
                  {"r", layout.r()},
                  {"solves", sens.solves},
                  {"dropped_zero_rows", restricted.dropped_nodes}};
  const auto summary = summarize(restricted.factor);
  write_summary(out, summary, experiment);
  if (e.run_ensemble) {
    validate_against(restricted.factor, s);
    experiment["sampling"] = provenance(s);
    run_ensembles(restricted.factor, summary, s, c, experiment);
  }
  std::cout << json{{"r", layout.r()},
                    {"solves", sens.solves},
                    {"dropped_zero_rows", restricted.dropped_nodes.size()},
                    {"summary", io::to_json(summary)}}
                   .dump(2)
            << '\n';
  return kOk;
}

int report_error(const char* kind, const std::string& message, int code) {
  json err{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  std::cerr << err.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uniform row-subsampling experiments for rank-deficient Gauss-Newton Hessians",
               "sketch"};
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags win");
  app.require_subcommand(1);

  FactorSource src;
  SamplingOptions sampling;
  CommonOptions common;

  auto* synthetic = app.add_subcommand("synthetic", "Generate a synthetic factor and summarize it");
  bool save_factor = true;
  std::uint64_t synth_seed = 0;
  add_factor_options(synthetic, src);
  synthetic->add_option("--seed", synth_seed, "Generation seed");
  synthetic->add_option("--save-factor", save_factor, "Write phi.hsk");
  add_common_options(synthetic, common);

  auto* ensemble = app.add_subcommand("ensemble", "Monte Carlo condition-number ensembles");
  add_factor_options(ensemble, src);
  add_sampling_options(ensemble, sampling);
  add_common_options(ensemble, common);

  auto* bounds = app.add_subcommand("bounds", "Closed-form theorem quantities per sample size");
  std::vector<std::size_t> bounds_m{1};
  std::uint64_t bounds_seed = 0;
  add_factor_options(bounds, src);
  bounds->add_option("--m", bounds_m, "Sample sizes, comma separated")->delimiter(',');
  bounds->add_option("--seed", bounds_seed, "Generation seed for synthetic factors");
  add_common_options(bounds, common);

  auto* moments = app.add_subcommand("moments", "Moment and tail checks of ||M_s||_2");
  add_factor_options(moments, src);
  add_sampling_options(moments, sampling);
  add_common_options(moments, common);

  auto* ell = app.add_subcommand("elliptic", "Elliptic sensitivity data (Shepp-Logan media)");
  EllipticOptions eopt;
  ell->add_option("--preset", eopt.preset, "Layout preset")
      ->check(CLI::IsMember(elliptic::layout_preset_names()));
  ell->add_option("--nodes-per-side", eopt.nodes_per_side, "Grid nodes per side");
  ell->add_option("--domain", eopt.domain, "Measurement subdomain")
      ->check(CLI::IsMember({"D1", "D2"}));
  ell->add_option("--source-fraction", eopt.source_fraction, "Fraction of domain nodes used as sources");
  ell->add_option("--detector-radius", eopt.detector_radius, "Chebyshev detector radius (grid units)");
  ell->add_option("--detectors-per-source", eopt.detectors_per_source,
                  "Detectors kept per source (0 = all in the box)");
  ell->add_flag("--half-open", eopt.half_open, "Drop nodes on the upper subdomain edges");
  ell->add_option("--layout-seed", eopt.layout_seed, "Layout seed");
  ell->add_option("--averaging", eopt.averaging, "Face coefficient averaging")
      ->check(CLI::IsMember({"arithmetic", "harmonic"}));
  ell->add_flag("--ensemble", eopt.run_ensemble, "Also run condition ensembles for --m");
  add_sampling_options(ell, sampling);
  add_common_options(ell, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("config", e.what(), kConfigError);
  }

  try {
    if (*synthetic) {
      validate(src);
      return cmd_synthetic(src, synth_seed, save_factor, common);
    }
    if (*ensemble) {
      validate(src);
      validate(sampling);
      return cmd_ensemble(src, sampling, common);
    }
    if (*bounds) {
      validate(src);
      for (auto m : bounds_m) require(m >= 1, "sample sizes must be >= 1");
      return cmd_bounds(src, bounds_m, bounds_seed, common);
    }
    if (*moments) {
      validate(src);
      validate(sampling);
      return cmd_moments(src, sampling, common);
    }
    if (*ell) return cmd_elliptic(eopt, sampling, ell, common);
  } catch (const CLI::ValidationError& e) {
    return report_error("config", e.what(), kConfigError);
  } catch (const ContractError& e) {
    return report_error("config", e.what(), kConfigError);
  } catch (const DegenerateError& e) {
    return report_error("degenerate", e.what(), kDegenerate);
  } catch (const SolverError& e) {
    return report_error("solver", e.what(), kDegenerate);
  } catch (const FormatError& e) {
    return report_error("format", e.what(), kIoError);
  } catch (const IoError& e) {
    return report_error("io", e.what(), kIoError);
  }
  return kOk;
}

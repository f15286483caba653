#include "hsketch/io.hpp"

#include "hsketch/error.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hsketch::io {

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_factor(const GramFactor& f) {
  const DenseMatrix& phi = f.phi();
  std::vector<std::uint8_t> out;
  out.reserve(kFactorHeaderBytes + 8 * static_cast<std::size_t>(phi.size()));
  out.insert(out.end(), std::begin(kFactorMagic), std::end(kFactorMagic));
  put_u64(out, f.n());
  put_u64(out, f.r());
  for (Eigen::Index i = 0; i < phi.rows(); ++i)
    for (Eigen::Index j = 0; j < phi.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(phi(i, j)));
  return out;
}

GramFactor decode_factor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFactorHeaderBytes)
    throw FormatError("factor file truncated: " + std::to_string(bytes.size()) +
                      " bytes, header needs " + std::to_string(kFactorHeaderBytes));
  if (std::memcmp(bytes.data(), kFactorMagic, 4) != 0)
    throw FormatError("factor file has bad magic (expected HSK1)");
  const std::uint64_t n = get_u64(bytes.data() + 4);
  const std::uint64_t r = get_u64(bytes.data() + 12);
  if (n == 0 || r == 0 || n > (std::numeric_limits<std::uint64_t>::max() / 8) / r)
    throw FormatError("factor file has invalid shape");
  const std::uint64_t expect = kFactorHeaderBytes + 8 * n * r;
  if (bytes.size() != expect)
    throw FormatError("factor file size " + std::to_string(bytes.size()) + " does not match " +
                      std::to_string(n) + "x" + std::to_string(r) + " (" +
                      std::to_string(expect) + " bytes)");
  DenseMatrix phi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r));
  const std::uint8_t* p = bytes.data() + kFactorHeaderBytes;
  for (Eigen::Index i = 0; i < phi.rows(); ++i)
    for (Eigen::Index j = 0; j < phi.cols(); ++j, p += 8)
      phi(i, j) = std::bit_cast<double>(get_u64(p));
  try {
    return GramFactor(std::move(phi));
  } catch (const ContractError& e) {
    throw FormatError(std::string("factor file content rejected: ") + e.what());
  }
}

void save_factor(const std::filesystem::path& path, const GramFactor& f) {
  const auto bytes = encode_factor(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

GramFactor load_factor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_factor(bytes);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

double parse_number(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw FormatError("not a number: '" + s + "'");
}

nlohmann::json to_json(const SpectralSummary& s) {
  return {{"N", s.n},          {"r", s.r},         {"trace", number(s.trace)},
          {"frob", number(s.frob)}, {"snorm", number(s.snorm)}, {"ell", number(s.ell)},
          {"L", number(s.big_l)},   {"mu", number(s.mu)},
          {"snorm_over_trace", number(s.snorm / s.trace)},
          {"frob_over_trace", number(s.frob / s.trace)},
          {"L_over_ell", number(s.big_l / s.ell)}};
}

nlohmann::json to_json(const TheoremReport& t) {
  return {{"m", t.m},
          {"tau", number(t.tau)},
          {"threshold", number(t.threshold)},
          {"crude_bound", number(t.crude_bound)},
          {"success_prob", number(t.success_prob)},
          {"m_max", number(t.m_max)},
          {"admissible", t.admissible}};
}

nlohmann::json to_json(const EnsembleReport& rep) {
  nlohmann::json j;
  j["config"] = {{"N", rep.n},
                 {"r", rep.r},
                 {"m", rep.m},
                 {"trials", rep.trials},
                 {"seed", rep.seed},
                 {"sampling_mode", std::string(to_string(rep.mode))},
                 {"cond_rank_tol", number(rep.cond_rank_tol)},
                 {"eta", number(rep.eta)}};
  j["summary"] = to_json(rep.summary);
  j["theorem"] = rep.theorem ? to_json(*rep.theorem) : nlohmann::json(nullptr);
  j["cond_quantiles"] = {{"q20", number(rep.cond_q20)},
                         {"q50", number(rep.cond_q50)},
                         {"q80", number(rep.cond_q80)}};
  j["failure"] = {{"threshold", number(rep.failure_threshold)},
                  {"probability", number(rep.failure_prob)}};
  auto& hists = j["rank_histograms"] = nlohmann::json::array();
  for (const auto& h : rep.rank_histograms) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [rank, count] : h.counts) counts[std::to_string(rank)] = count;
    hists.push_back({{"threshold", number(h.threshold)}, {"counts", counts}});
  }
  auto& moments = j["moments"] = nlohmann::json::array();
  for (const auto& m : rep.moments)
    moments.push_back({{"p", m.p}, {"estimate", number(m.estimate)}, {"bound", number(m.bound)}});
  j["refined"] = {{"eta", number(rep.eta)},
                  {"ell0", number(rep.ell0)},
                  {"L0", number(rep.big_l0)},
                  {"L0_over_ell0", number(rep.big_l0 / rep.ell0)}};
  j["theorem_event_fraction"] =
      rep.theorem_event_fraction ? number(*rep.theorem_event_fraction) : nlohmann::json(nullptr);
  j["tail_event_fraction"] =
      rep.tail_event_fraction ? number(*rep.tail_event_fraction) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const elliptic::MeasurementLayout& layout) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : layout.pairs) pairs.push_back({a, b});
  const auto& o = layout.options;
  return {{"domain", std::string(elliptic::to_string(layout.domain))},
          {"source_fraction", number(o.source_fraction)},
          {"detector_radius", o.detector_radius},
          {"detectors_per_source", o.detectors_per_source},
          {"edges", o.edges == elliptic::DomainEdges::kClosed ? "closed" : "half-open"},
          {"seed", o.seed},
          {"r", layout.r()},
          {"sources", layout.source_nodes},
          {"pairs", pairs}};
}

void write_ensemble_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kEnsembleCsvHeader << '\n';
  auto rank = [](const TrialRecord& rec, double th) -> std::string {
    const auto it = rec.rank_at.find(th);
    return it == rec.rank_at.end() ? "" : std::to_string(it->second);
  };
  for (const auto& rec : records) {
    out << rec.trial_id << ',' << format_number(rec.cond) << ',' << rank(rec, 1e-6) << ','
        << rank(rec, 1e-2) << ',' << format_number(rec.min_diag) << ','
        << format_number(rec.max_diag) << ',' << format_number(rec.hollow_norm) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const SpectralSummary& s) {
  out << kSummaryCsvHeader << '\n'
      << s.n << ',' << s.r << ',' << format_number(s.trace) << ',' << format_number(s.frob) << ','
      << format_number(s.snorm) << ',' << format_number(s.ell) << ',' << format_number(s.big_l)
      << ',' << format_number(s.mu) << '\n';
}

void write_bounds_csv(std::ostream& out, const std::vector<TheoremReport>& rows) {
  out << kBoundsCsvHeader << '\n';
  for (const auto& t : rows)
    out << t.m << ',' << format_number(t.tau) << ',' << format_number(t.threshold) << ','
        << format_number(t.crude_bound) << ',' << format_number(t.success_prob) << ','
        << (t.admissible ? 1 : 0) << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hsketch::io

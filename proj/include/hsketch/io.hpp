#pragma once

#include "hsketch/bounds.hpp"
#include "hsketch/elliptic.hpp"
#include "hsketch/ensemble.hpp"
#include "hsketch/numkit.hpp"
#include "hsketch/spectral.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hsketch::io {

// Factor file layout ("HSK1"):
//   bytes 0..3    magic "HSK1"
//   bytes 4..11   N, uint64 little-endian
//   bytes 12..19  r, uint64 little-endian
//   then N*r      float64 little-endian, row-major
inline constexpr char kFactorMagic[4] = {'H', 'S', 'K', '1'};
inline constexpr std::size_t kFactorHeaderBytes = 20;

std::vector<std::uint8_t> encode_factor(const GramFactor& f);
/// Throws FormatError on bad magic or a size that does not match N*r exactly.
GramFactor decode_factor(std::span<const std::uint8_t> bytes);

void save_factor(const std::filesystem::path& path, const GramFactor& f);
GramFactor load_factor(const std::filesystem::path& path);

/// JSON number, or the string "inf" / "-inf" / "nan" for non-finite values.
nlohmann::json number(double v);
/// Inverse of `number`.
double parse_number(const nlohmann::json& j);

nlohmann::json to_json(const SpectralSummary& s);
nlohmann::json to_json(const TheoremReport& t);
nlohmann::json to_json(const EnsembleReport& rep);
nlohmann::json to_json(const elliptic::MeasurementLayout& layout);

/// Shortest round-trip decimal form; "inf" for infinity.
std::string format_number(double v);

// Column sets are part of the on-disk contract.
inline constexpr const char* kEnsembleCsvHeader =
    "trial_id,cond,rank@1e-6,rank@1e-2,min_diag,max_diag,hollow_norm";
inline constexpr const char* kSummaryCsvHeader = "N,r,trace,frob,snorm,ell,L,mu";
inline constexpr const char* kBoundsCsvHeader =
    "m,tau,threshold,crude_bound,success_prob,admissible";

void write_ensemble_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_summary_csv(std::ostream& out, const SpectralSummary& s);
void write_bounds_csv(std::ostream& out, const std::vector<TheoremReport>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace hsketch::io

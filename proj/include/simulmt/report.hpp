#pragma once

// Machine-readable renderings (JSON, TSV cells) of the library's results.
// Everything here is deterministic: identical inputs give identical bytes.

#include <nlohmann/json.hpp>
#include <string>

#include "simulmt/corpus.hpp"
#include "simulmt/quality.hpp"

namespace simulmt {

/// Shortest round-trip decimal, always with a fractional part ("3.0",
/// "0.3333333333333333").
std::string format_decimal(double value);

/// Fixed-point with `places` decimals; never prints "-0.0...".
std::string format_fixed(double value, int places);

/// Fraction as a signed percentage with one decimal ("-23.4%").
std::string format_percent(double fraction);

/// Rounds to `places` decimals (half away from zero).
double round_to(double value, int places);

/// TSV cell for a per-pair AA: the value, or "NA" when unscoreable.
std::string aa_cell(const PairScore& score);

nlohmann::ordered_json to_json(const AAReport& report);
nlohmann::ordered_json to_json(const FilterStats& stats, const FilterOptions& options);
nlohmann::ordered_json to_json(const BleuScore& score, Smoothing smoothing);
nlohmann::ordered_json to_json(const MetricReport& report);

}  // namespace simulmt

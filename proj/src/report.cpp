#include "simulmt/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace simulmt {

namespace {

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string format_decimal(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) value = 0.0;  // drop the sign of -0.0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, ptr);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

std::string format_fixed(double value, int places) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", places, value);
  std::string out(buf);
  // "-0.0" and friends.
  if (out.front() == '-' &&
      out.find_first_not_of("-0.") == std::string::npos) {
    out.erase(0, 1);
  }
  return out;
}

std::string format_percent(double fraction) {
  return format_fixed(fraction * 100.0, 1) + "%";
}

double round_to(double value, int places) {
  const double scale = std::pow(10.0, places);
  return std::round(value * scale) / scale;
}

std::string aa_cell(const PairScore& score) {
  return score.aa ? format_decimal(*score.aa) : "NA";
}

nlohmann::ordered_json to_json(const AAReport& report) {
  nlohmann::ordered_json j;
  j["total"] = report.total;
  j["scored"] = report.scored;
  j["unscoreable"] = report.unscoreable;
  j["monotonic_count"] = report.monotonic_count;
  j["mean_aa"] = optional_number(report.mean_aa);
  j["link_weighted_aa"] = optional_number(report.link_weighted_aa);
  return j;
}

nlohmann::ordered_json to_json(const FilterStats& stats,
                               const FilterOptions& options) {
  nlohmann::ordered_json j;
  j["total"] = stats.total;
  j["eligible"] = stats.eligible;
  j["kept"] = stats.kept;
  j["dropped_above_threshold"] = stats.dropped_above_threshold;
  j["dropped_unscoreable"] = stats.dropped_unscoreable;
  j["dropped_by_sampling"] = stats.dropped_by_sampling;
  nlohmann::ordered_json params;
  params["threshold"] = std::isinf(options.threshold)
                            ? nlohmann::ordered_json("inf")
                            : nlohmann::ordered_json(options.threshold);
  params["sample_size"] = options.sample_size
                              ? nlohmann::ordered_json(*options.sample_size)
                              : nlohmann::ordered_json(nullptr);
  params["seed"] = options.seed ? nlohmann::ordered_json(*options.seed)
                                : nlohmann::ordered_json(nullptr);
  j["parameters"] = std::move(params);
  return j;
}

nlohmann::ordered_json to_json(const BleuScore& score, Smoothing smoothing) {
  nlohmann::ordered_json j;
  j["score"] = round_to(score.score, 4);
  nlohmann::ordered_json precisions = nlohmann::ordered_json::array();
  for (const double p : score.precisions) precisions.push_back(p);
  j["precisions"] = std::move(precisions);
  j["brevity_penalty"] = score.brevity_penalty;
  j["hyp_len"] = score.hyp_len;
  j["ref_len"] = score.ref_len;
  j["smoothing"] = to_string(smoothing);
  return j;
}

nlohmann::ordered_json to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["inputs"] = report.inputs;
  j["corpus"] = report.corpus;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : report.per_sentence) {
    nlohmann::ordered_json r;
    r["id"] = row.id;
    for (const auto& [k, v] : row.values) r[k] = v;
    rows.push_back(std::move(r));
  }
  j["per_sentence"] = std::move(rows);
  return j;
}

}  // namespace simulmt

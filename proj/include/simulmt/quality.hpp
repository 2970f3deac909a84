#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "simulmt/core.hpp"

namespace simulmt {

enum class Smoothing { kNone, kExp };

Smoothing smoothing_from_string(std::string_view name);
std::string_view to_string(Smoothing s);

inline constexpr int kBleuOrder = 4;

/// Sufficient statistics of corpus BLEU. Merging is associative and
/// commutative, so per-sentence stats can be pooled in any order.
struct BleuStats {
  std::array<std::int64_t, kBleuOrder> matches{};
  std::array<std::int64_t, kBleuOrder> totals{};
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& other);
  friend bool operator==(const BleuStats&, const BleuStats&) = default;
};

struct BleuScore {
  double score = 0.0;  // 0..100
  std::array<double, kBleuOrder> precisions{};  // fractions in [0, 1]
  double brevity_penalty = 0.0;
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;
};

/// Clipped n-gram matches (n = 1..4) of one hypothesis against one reference.
BleuStats sentence_stats(const TokenSeq& hypothesis, const TokenSeq& reference);

/// BLEU-4 with brevity penalty from pooled statistics.
BleuScore bleu_from_stats(const BleuStats& stats, Smoothing smoothing);

/// Single-reference corpus BLEU. Throws InvalidArgument on length mismatch
/// or an empty corpus.
BleuScore corpus_bleu(std::span<const TokenSeq> hypotheses,
                      std::span<const TokenSeq> references,
                      Smoothing smoothing = Smoothing::kExp);

/// Score relative to the full-sentence base score. Throws on base <= 0.
double norm_score(double model_score, double base_score);

/// Signed relative change (low - high) / high as a fraction; multiply by 100
/// for percent. Throws on high <= 0.
double drop_rate(double high_score, double low_score);

/// BLEU between system and reference partial outputs at each matching
/// source-prefix length, pooled into one corpus. Logs are paired by id;
/// prefix pairs whose reference partial is empty are skipped.
BleuScore bleu_stream(std::span<const StreamLog> system_logs,
                      std::span<const StreamLog> reference_logs,
                      Smoothing smoothing = Smoothing::kExp);

/// Visible output after exactly `reads` Read actions, for p = 1..read_count:
/// element p-1 of the result. Streaming logs: Writes issued before Read p+1.
/// Retranslation logs: latest Snapshot taken with at most p reads.
std::vector<TokenSeq> partial_outputs(const StreamLog& log);

}  // namespace simulmt

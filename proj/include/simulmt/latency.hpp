#pragma once

#include <boost/rational.hpp>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "simulmt/core.hpp"

namespace simulmt {

using Rational = boost::rational<std::int64_t>;

/// Delays of one sentence: delays[t] is the number of source tokens read
/// when target token t+1 was written.
struct DelayProfile {
  std::vector<std::size_t> delays;
  std::size_t source_len = 0;
  std::size_t target_len = 0;

  /// Throws InvalidArgument unless delays is non-decreasing, within
  /// [1, source_len], and target_len == delays.size().
  void validate() const;

  friend bool operator==(const DelayProfile&, const DelayProfile&) = default;
};

/// Successive full hypotheses of a re-translation system and the number of
/// source tokens read before each.
struct HypothesisTrace {
  std::vector<TokenSeq> snapshots;
  std::vector<std::size_t> reads_at;
  std::size_t source_len = 0;
};

/// Delay profile of a streaming log. Throws InvalidArgument for
/// retranslation logs.
DelayProfile delays_from_log(const StreamLog& log);

/// Average lagging, exact. Let r = target_len / source_len and tau the first
/// (1-based) t with delays[t] == source_len, or target_len when the source
/// is never fully read before the last write:
///   AL = 1/tau * sum_{t=1..tau} (delays[t] - (t - 1) / r)
/// Throws InvalidArgument on an empty or inconsistent profile.
Rational average_lagging_exact(const DelayProfile& profile);
double average_lagging(const DelayProfile& profile);

/// Tokens of `prev` that must be erased to display `next`:
/// |prev| - LCP(prev, next).
std::size_t erasure(const TokenSeq& prev, const TokenSeq& next);

/// Total erasure over consecutive snapshots divided by the final length.
/// Throws UndefinedNE when there is no snapshot or the final one is empty.
Rational normalized_erasure_exact(const HypothesisTrace& trace);
double normalized_erasure(const HypothesisTrace& trace);

/// Snapshot trace of a retranslation log. Throws InvalidArgument for
/// streaming logs.
HypothesisTrace trace_from_log(const StreamLog& log);

/// Extension, not part of the standard streaming AL: delays derived from a
/// re-translation trace. Target token t counts as written at the earliest
/// snapshot after which the final hypothesis' length-t prefix never changes.
DelayProfile stabilized_delays(const HypothesisTrace& trace);

/// Wait-k schedule: read min(k, source_len), then alternate Write/Read until
/// the source is exhausted, then write the remaining targets. Uses
/// placeholder tokens s1..sn / t1..tm unless real text is supplied (which
/// must then have exactly source_len / target_len tokens).
StreamLog waitk_path(std::size_t source_len, std::size_t target_len,
                     std::size_t k, std::string id = "waitk",
                     const std::optional<TokenSeq>& source = std::nullopt,
                     const std::optional<TokenSeq>& target = std::nullopt);

/// All rule violations of `log`; with a source, also checks that Reads
/// reproduce the source exactly and completely. Never throws.
std::vector<Violation> validate_log(const StreamLog& log,
                                    const TokenSeq* source = nullptr);

}  // namespace simulmt

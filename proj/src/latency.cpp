#include "simulmt/latency.hpp"

#include <algorithm>
#include <string>

namespace simulmt {

void DelayProfile::validate() const {
  if (target_len != delays.size()) {
    throw InvalidArgument("delay profile has " + std::to_string(delays.size()) +
                          " delays but target length " +
                          std::to_string(target_len));
  }
  for (std::size_t t = 0; t < delays.size(); ++t) {
    if (delays[t] < 1 || delays[t] > source_len) {
      throw InvalidArgument("delay " + std::to_string(delays[t]) +
                            " at target position " + std::to_string(t) +
                            " outside [1, " + std::to_string(source_len) + "]");
    }
    if (t > 0 && delays[t] < delays[t - 1]) {
      throw InvalidArgument("delays decrease at target position " +
                            std::to_string(t));
    }
  }
}

DelayProfile delays_from_log(const StreamLog& log) {
  if (log.mode() != LogMode::kStreaming) {
    throw InvalidArgument("log '" + log.id() +
                          "' is a retranslation log; AL needs a streaming log");
  }
  DelayProfile profile;
  std::size_t reads = 0;
  for (const auto& a : log.actions()) {
    if (std::holds_alternative<Read>(a)) {
      ++reads;
    } else if (std::holds_alternative<Write>(a)) {
      profile.delays.push_back(reads);
    }
  }
  profile.source_len = reads;
  profile.target_len = profile.delays.size();
  return profile;
}

Rational average_lagging_exact(const DelayProfile& profile) {
  profile.validate();
  if (profile.source_len == 0 || profile.target_len == 0) {
    throw InvalidArgument("AL needs at least one source and one target token");
  }
  const auto src = static_cast<std::int64_t>(profile.source_len);
  const auto tgt = static_cast<std::int64_t>(profile.target_len);

  std::size_t tau = profile.target_len;
  for (std::size_t t = 0; t < profile.delays.size(); ++t) {
    if (profile.delays[t] == profile.source_len) {
      tau = t + 1;
      break;
    }
  }
  // (t - 1) / r == (t - 1) * src / tgt; accumulate over the common
  // denominator tgt.
  std::int64_t numerator = 0;
  for (std::size_t t = 1; t <= tau; ++t) {
    numerator += static_cast<std::int64_t>(profile.delays[t - 1]) * tgt -
                 static_cast<std::int64_t>(t - 1) * src;
  }
  return Rational(numerator, tgt * static_cast<std::int64_t>(tau));
}

double average_lagging(const DelayProfile& profile) {
  return boost::rational_cast<double>(average_lagging_exact(profile));
}

std::size_t erasure(const TokenSeq& prev, const TokenSeq& next) {
  const auto n = std::min(prev.size(), next.size());
  std::size_t lcp = 0;
  while (lcp < n && prev[lcp] == next[lcp]) ++lcp;
  return prev.size() - lcp;
}

Rational normalized_erasure_exact(const HypothesisTrace& trace) {
  if (trace.snapshots.empty() || trace.snapshots.back().empty()) {
    throw UndefinedNE();
  }
  std::int64_t erased = 0;
  for (std::size_t i = 1; i < trace.snapshots.size(); ++i) {
    erased += static_cast<std::int64_t>(
        erasure(trace.snapshots[i - 1], trace.snapshots[i]));
  }
  return Rational(erased,
                  static_cast<std::int64_t>(trace.snapshots.back().size()));
}

double normalized_erasure(const HypothesisTrace& trace) {
  return boost::rational_cast<double>(normalized_erasure_exact(trace));
}

HypothesisTrace trace_from_log(const StreamLog& log) {
  if (log.mode() != LogMode::kRetranslation) {
    throw InvalidArgument("log '" + log.id() +
                          "' is a streaming log; NE needs a retranslation log");
  }
  HypothesisTrace trace;
  std::size_t reads = 0;
  for (const auto& a : log.actions()) {
    if (std::holds_alternative<Read>(a)) {
      ++reads;
    } else if (const auto* s = std::get_if<Snapshot>(&a)) {
      trace.snapshots.push_back(s->hypothesis);
      trace.reads_at.push_back(reads);
    }
  }
  trace.source_len = reads;
  return trace;
}

DelayProfile stabilized_delays(const HypothesisTrace& trace) {
  if (trace.snapshots.size() != trace.reads_at.size()) {
    throw InvalidArgument("trace has mismatched snapshot and read counts");
  }
  DelayProfile profile;
  profile.source_len = trace.source_len;
  if (trace.snapshots.empty()) return profile;

  const auto& final_hyp = trace.snapshots.back();
  profile.delays.resize(final_hyp.size());
  // stable_from[t]: first snapshot index from which prefix length t+1 stays
  // equal to the final one. Scan snapshots backwards, tracking how long a
  // prefix of the final hypothesis every later snapshot shares.
  std::vector<std::size_t> stable_from(final_hyp.size(), trace.snapshots.size() - 1);
  std::size_t shared = final_hyp.size();
  for (std::size_t s = trace.snapshots.size(); s-- > 0;) {
    const auto& snap = trace.snapshots[s];
    std::size_t lcp = 0;
    const auto n = std::min(snap.size(), final_hyp.size());
    while (lcp < n && snap[lcp] == final_hyp[lcp]) ++lcp;
    shared = std::min(shared, lcp);
    for (std::size_t t = 0; t < shared; ++t) stable_from[t] = s;
  }
  for (std::size_t t = 0; t < final_hyp.size(); ++t) {
    profile.delays[t] = trace.reads_at[stable_from[t]];
  }
  profile.target_len = profile.delays.size();
  return profile;
}

StreamLog waitk_path(std::size_t source_len, std::size_t target_len,
                     std::size_t k, std::string id,
                     const std::optional<TokenSeq>& source,
                     const std::optional<TokenSeq>& target) {
  if (source_len == 0 || target_len == 0) {
    throw InvalidArgument("wait-k path needs non-zero source and target lengths");
  }
  if (k == 0) throw InvalidArgument("wait-k needs k >= 1");
  if (source && source->size() != source_len) {
    throw InvalidArgument("source text length does not match source_len");
  }
  if (target && target->size() != target_len) {
    throw InvalidArgument("target text length does not match target_len");
  }
  const auto src_tok = [&](std::size_t i) {
    return source ? (*source)[i] : "s" + std::to_string(i + 1);
  };
  const auto tgt_tok = [&](std::size_t j) {
    return target ? (*target)[j] : "t" + std::to_string(j + 1);
  };

  std::vector<Action> actions;
  actions.reserve(source_len + target_len);
  std::size_t reads = 0;
  std::size_t writes = 0;
  while (reads < std::min(k, source_len)) actions.emplace_back(Read{src_tok(reads++)});
  while (writes < target_len) {
    actions.emplace_back(Write{tgt_tok(writes++)});
    if (reads < source_len && writes < target_len) {
      actions.emplace_back(Read{src_tok(reads++)});
    }
  }
  // Shorter target than source: the remaining source is still read so the
  // log covers the full sentence.
  while (reads < source_len) actions.emplace_back(Read{src_tok(reads++)});
  return StreamLog(std::move(id), LogMode::kStreaming, std::move(actions));
}

std::vector<Violation> validate_log(const StreamLog& log, const TokenSeq* source) {
  auto out = check_actions(log.mode(), log.actions());
  if (source == nullptr) return out;

  std::size_t r = 0;
  for (const auto& a : log.actions()) {
    const auto* read = std::get_if<Read>(&a);
    if (read == nullptr) continue;
    if (r >= source->size()) {
      out.push_back({r, "read beyond end of source at source index " +
                            std::to_string(r)});
    } else if (read->token != (*source)[r]) {
      out.push_back({r, "read token '" + read->token + "' at source index " +
                            std::to_string(r) + " does not match source '" +
                            (*source)[r] + "'"});
    }
    ++r;
  }
  if (r < source->size()) {
    out.push_back({std::nullopt, "source not fully read: " + std::to_string(r) +
                                     " of " + std::to_string(source->size()) +
                                     " tokens read"});
  }
  return out;
}

}  // namespace simulmt

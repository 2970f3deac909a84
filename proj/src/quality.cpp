#include "simulmt/quality.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace simulmt {

namespace {

using NgramCounts = std::unordered_map<std::string, std::int64_t>;

// Tokens carry no whitespace, so a space-joined key is unambiguous.
std::array<NgramCounts, kBleuOrder> count_ngrams(const TokenSeq& seq) {
  std::array<NgramCounts, kBleuOrder> counts;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    std::string key;
    for (std::size_t n = 0; n < kBleuOrder && i + n < seq.size(); ++n) {
      if (n) key += ' ';
      key += seq[i + n];
      ++counts[n][key];
    }
  }
  return counts;
}

}  // namespace

Smoothing smoothing_from_string(std::string_view name) {
  if (name == "exp") return Smoothing::kExp;
  if (name == "none") return Smoothing::kNone;
  throw InvalidArgument("unknown smoothing '" + std::string(name) +
                        "' (expected exp or none)");
}

std::string_view to_string(Smoothing s) {
  return s == Smoothing::kExp ? "exp" : "none";
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (int n = 0; n < kBleuOrder; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
  return *this;
}

BleuStats sentence_stats(const TokenSeq& hypothesis, const TokenSeq& reference) {
  BleuStats stats;
  stats.hyp_len = static_cast<std::int64_t>(hypothesis.size());
  stats.ref_len = static_cast<std::int64_t>(reference.size());
  const auto hyp = count_ngrams(hypothesis);
  const auto ref = count_ngrams(reference);
  for (int n = 0; n < kBleuOrder; ++n) {
    const auto len = static_cast<std::int64_t>(hypothesis.size());
    stats.totals[n] = std::max<std::int64_t>(len - n, 0);
    for (const auto& [gram, count] : hyp[n]) {
      const auto it = ref[n].find(gram);
      if (it != ref[n].end()) stats.matches[n] += std::min(count, it->second);
    }
  }
  return stats;
}

BleuScore bleu_from_stats(const BleuStats& stats, Smoothing smoothing) {
  BleuScore out;
  out.hyp_len = stats.hyp_len;
  out.ref_len = stats.ref_len;
  if (stats.hyp_len == 0) return out;

  out.brevity_penalty =
      stats.hyp_len > stats.ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(stats.ref_len) /
                               static_cast<double>(stats.hyp_len));

  double smooth = 1.0;
  double log_sum = 0.0;
  bool zero = false;
  for (int n = 0; n < kBleuOrder; ++n) {
    const auto total = stats.totals[n];
    const auto match = stats.matches[n];
    if (total == 0) {
      zero = true;
      continue;
    }
    if (match == 0) {
      if (smoothing == Smoothing::kExp) {
        smooth *= 2.0;
        out.precisions[n] = 1.0 / (smooth * static_cast<double>(total));
      } else {
        zero = true;
        continue;
      }
    } else {
      out.precisions[n] =
          static_cast<double>(match) / static_cast<double>(total);
    }
    log_sum += std::log(out.precisions[n]);
  }
  out.score = zero ? 0.0
                   : out.brevity_penalty * std::exp(log_sum / kBleuOrder) * 100.0;
  return out;
}

BleuScore corpus_bleu(std::span<const TokenSeq> hypotheses,
                      std::span<const TokenSeq> references, Smoothing smoothing) {
  if (hypotheses.size() != references.size()) {
    throw InvalidArgument("hypothesis count " + std::to_string(hypotheses.size()) +
                          " differs from reference count " +
                          std::to_string(references.size()));
  }
  if (hypotheses.empty()) throw InvalidArgument("BLEU over an empty corpus");
  BleuStats pooled;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    pooled += sentence_stats(hypotheses[i], references[i]);
  }
  return bleu_from_stats(pooled, smoothing);
}

double norm_score(double model_score, double base_score) {
  if (!(base_score > 0.0)) {
    throw InvalidArgument("norm score needs a positive base score");
  }
  return model_score / base_score;
}

double drop_rate(double high_score, double low_score) {
  if (!(high_score > 0.0)) {
    throw InvalidArgument("drop rate needs a positive reference score");
  }
  return (low_score - high_score) / high_score;
}

std::vector<TokenSeq> partial_outputs(const StreamLog& log) {
  std::vector<TokenSeq> out;
  TokenSeq visible;
  bool started = false;
  for (const auto& a : log.actions()) {
    if (std::holds_alternative<Read>(a)) {
      if (started) out.push_back(visible);
      started = true;
    } else if (const auto* w = std::get_if<Write>(&a)) {
      visible.push_back(w->token);
    } else {
      visible = std::get<Snapshot>(a).hypothesis;
    }
  }
  if (started) out.push_back(visible);
  return out;
}

BleuScore bleu_stream(std::span<const StreamLog> system_logs,
                      std::span<const StreamLog> reference_logs,
                      Smoothing smoothing) {
  std::unordered_map<std::string, const StreamLog*> by_id;
  for (const auto& log : system_logs) {
    if (!by_id.emplace(log.id(), &log).second) {
      throw InvalidArgument("duplicate system log id '" + log.id() + "'");
    }
  }
  if (system_logs.size() != reference_logs.size()) {
    throw InvalidArgument("system and reference log counts differ (" +
                          std::to_string(system_logs.size()) + " vs " +
                          std::to_string(reference_logs.size()) + ")");
  }
  std::vector<TokenSeq> hyps;
  std::vector<TokenSeq> refs;
  for (const auto& ref : reference_logs) {
    if (ref.mode() != LogMode::kStreaming) {
      throw InvalidArgument("reference log '" + ref.id() + "' is not a streaming log");
    }
    const auto it = by_id.find(ref.id());
    if (it == by_id.end()) {
      throw InvalidArgument("no system log for reference id '" + ref.id() + "'");
    }
    const auto& sys = *it->second;
    if (sys.read_count() != ref.read_count()) {
      throw InvalidArgument("log '" + ref.id() + "': system read " +
                            std::to_string(sys.read_count()) +
                            " source tokens, reference read " +
                            std::to_string(ref.read_count()));
    }
    const auto sys_partials = partial_outputs(sys);
    const auto ref_partials = partial_outputs(ref);
    for (std::size_t p = 0; p < ref_partials.size(); ++p) {
      if (ref_partials[p].empty()) continue;
      hyps.push_back(sys_partials[p]);
      refs.push_back(ref_partials[p]);
    }
  }
  if (refs.empty()) {
    throw InvalidArgument("every reference partial output is empty");
  }
  return corpus_bleu(hyps, refs, smoothing);
}

}  // namespace simulmt

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "simulmt/core.hpp"
#include "simulmt/monotonicity.hpp"

namespace simulmt {

struct Corpus {
  std::vector<SentencePair> pairs;
  /// Descriptors of the files the pairs came from ("source=<path>", ...).
  std::vector<std::string> provenance;
};

struct LoadedCorpus {
  Corpus corpus;
  /// One per pair when an alignment file was given, otherwise empty.
  std::vector<Alignment> alignments;
};

/// Default id of the 1-based corpus line `line`.
std::string line_id(std::size_t line);

/// Line-by-line reader over a source/target(/alignment) file triple. Holds
/// one line of each file at a time. Throws DataError naming the file and
/// line for bad tokens, bad alignments and line-count mismatches.
class ParallelReader {
 public:
  struct Record {
    std::size_t line = 0;  // 1-based
    SentencePair pair;
    std::optional<Alignment> alignment;
  };

  ParallelReader(std::filesystem::path source, std::filesystem::path target,
                 std::optional<std::filesystem::path> alignment = std::nullopt);

  /// Next record, or nullopt at the end of all files.
  std::optional<Record> next();

  std::vector<std::string> provenance() const;

 private:
  std::filesystem::path source_path_;
  std::filesystem::path target_path_;
  std::optional<std::filesystem::path> alignment_path_;
  std::ifstream source_;
  std::ifstream target_;
  std::ifstream alignment_;
  std::size_t line_ = 0;
};

/// Reads a whole corpus into memory.
LoadedCorpus load_parallel(const std::filesystem::path& source,
                           const std::filesystem::path& target,
                           const std::optional<std::filesystem::path>& alignment =
                               std::nullopt);

/// AA of one pair; `aa` is empty when the alignment has no links.
struct PairScore {
  std::string id;
  std::optional<double> aa;
  std::int64_t links = 0;
  std::int64_t anticipation = 0;  // sum of max(i - j, 0)
};

PairScore score_pair(std::string id, const Alignment& alignment);

struct AAReport {
  std::vector<PairScore> per_pair;
  /// Unweighted mean of per-pair AA over scoreable pairs.
  std::optional<double> mean_aa;
  /// Total anticipation over total links (analysis view).
  std::optional<double> link_weighted_aa;
  std::size_t monotonic_count = 0;
  std::size_t scored = 0;
  std::size_t unscoreable = 0;
  std::size_t total = 0;
};

/// Running aggregate over PairScores, folded in input order. Used by both
/// the in-memory and the file-streaming paths.
class AAAccumulator {
 public:
  void add(const PairScore& score);
  /// Aggregates only; per_pair is left empty.
  AAReport summary() const;

 private:
  double aa_sum_ = 0.0;
  std::int64_t anticipation_ = 0;
  std::int64_t links_ = 0;
  std::size_t monotonic_ = 0;
  std::size_t scored_ = 0;
  std::size_t total_ = 0;
};

/// Throws InvalidArgument when the alignment count differs from the corpus.
AAReport score_corpus(const Corpus& corpus, std::span<const Alignment> alignments);

struct FilterOptions {
  double threshold = 0.0;
  /// Keep a uniform random subset of this many eligible pairs. Requires seed.
  std::optional<std::size_t> sample_size;
  std::optional<std::uint64_t> seed;
};

struct FilterStats {
  std::size_t total = 0;
  std::size_t eligible = 0;  // scoreable with aa <= threshold
  std::size_t kept = 0;
  std::size_t dropped_above_threshold = 0;
  std::size_t dropped_unscoreable = 0;
  std::size_t dropped_by_sampling = 0;
};

struct DroppedPair {
  std::string id;
  std::string reason;  // "unscoreable", "above threshold" or "not sampled"
};

struct FilterResult {
  Corpus kept;
  std::vector<Alignment> kept_alignments;
  std::vector<DroppedPair> dropped;
  FilterStats stats;
};

/// Keeps the pairs with aa <= threshold, in input order. Unscoreable pairs
/// are always dropped.
FilterResult filter_monotonic(const Corpus& corpus,
                              std::span<const Alignment> alignments,
                              const FilterOptions& options = {});

/// Output paths written by the file pipeline for a prefix.
struct PipelineOutputs {
  std::filesystem::path aa_tsv;
  std::filesystem::path kept_source;
  std::filesystem::path kept_target;
  std::filesystem::path stats_json;

  static PipelineOutputs for_prefix(const std::string& prefix);
};

/// File-to-file version of filter_monotonic holding a constant number of
/// lines in memory. Writes <prefix>.aa.tsv, <prefix>.kept.{src,tgt} and
/// <prefix>.stats.json; returns the stats.
FilterStats filter_monotonic_files(const std::filesystem::path& source,
                                   const std::filesystem::path& target,
                                   const std::filesystem::path& alignment,
                                   const std::string& prefix,
                                   const FilterOptions& options = {});

/// Order-preserving selection sampling (Knuth's Algorithm S): exactly
/// min(sample, population) of the `population` offered items are taken.
class SelectionSampler {
 public:
  SelectionSampler(std::size_t population, std::size_t sample, std::uint64_t seed);
  /// Decides the next item.
  bool take();

 private:
  std::size_t remaining_;
  std::size_t needed_;
  std::mt19937_64 rng_;
};

struct SentenceMetrics {
  std::string id;
  std::map<std::string, double> values;
};

struct MetricReport {
  std::vector<SentenceMetrics> per_sentence;
  std::map<std::string, double> corpus;
  std::map<std::string, std::string> inputs;
};

/// Table-style dataset statistics: mean source length (the AL of
/// full-sentence translation), mean AA when alignments are given, mean
/// annotation AL when streaming logs are given.
MetricReport dataset_stats(const Corpus& corpus,
                           std::span<const Alignment> alignments = {},
                           std::span<const StreamLog> annotation_logs = {});

}  // namespace simulmt

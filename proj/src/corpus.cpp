#include "simulmt/corpus.hpp"

#include <cmath>
#include <unordered_map>

#include "simulmt/errors.hpp"
#include "simulmt/latency.hpp"
#include "simulmt/report.hpp"

namespace simulmt {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

bool read_line(std::ifstream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::size_t count_remaining(std::ifstream& in) {
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

void require_paired(const Corpus& corpus, std::span<const Alignment> alignments) {
  if (alignments.size() != corpus.pairs.size()) {
    throw InvalidArgument("corpus has " + std::to_string(corpus.pairs.size()) +
                          " pairs but " + std::to_string(alignments.size()) +
                          " alignments");
  }
}

void validate_threshold(const FilterOptions& options) {
  if (std::isnan(options.threshold)) {
    throw InvalidArgument("threshold must be a number");
  }
  if (options.sample_size && !options.seed) {
    throw InvalidArgument("subsampling needs an explicit seed");
  }
}

bool eligible(const PairScore& s, double threshold) {
  return s.aa && *s.aa <= threshold;
}

}  // namespace

std::string line_id(std::size_t line) { return "line-" + std::to_string(line); }

ParallelReader::ParallelReader(std::filesystem::path source,
                               std::filesystem::path target,
                               std::optional<std::filesystem::path> alignment)
    : source_path_(std::move(source)),
      target_path_(std::move(target)),
      alignment_path_(std::move(alignment)),
      source_(open_input(source_path_)),
      target_(open_input(target_path_)) {
  if (alignment_path_) alignment_ = open_input(*alignment_path_);
}

std::vector<std::string> ParallelReader::provenance() const {
  std::vector<std::string> out{"source=" + source_path_.string(),
                               "target=" + target_path_.string()};
  if (alignment_path_) out.push_back("alignment=" + alignment_path_->string());
  return out;
}

std::optional<ParallelReader::Record> ParallelReader::next() {
  std::string src_line;
  std::string tgt_line;
  std::string align_line;
  const bool has_src = read_line(source_, src_line);
  const bool has_tgt = read_line(target_, tgt_line);
  const bool has_align = alignment_path_ ? read_line(alignment_, align_line) : has_src;

  if (!has_src && !has_tgt && (!alignment_path_ || !has_align)) return std::nullopt;
  if (!has_src || !has_tgt || has_align != has_src) {
    const auto src_count = line_ + (has_src ? 1 + count_remaining(source_) : 0);
    const auto tgt_count = line_ + (has_tgt ? 1 + count_remaining(target_) : 0);
    std::string msg = "line count mismatch: " + source_path_.string() + " has " +
                      std::to_string(src_count) + " lines, " +
                      target_path_.string() + " has " + std::to_string(tgt_count);
    if (alignment_path_) {
      const auto al_count = line_ + (has_align ? 1 + count_remaining(alignment_) : 0);
      msg += ", " + alignment_path_->string() + " has " + std::to_string(al_count);
    }
    throw DataError(msg);
  }

  ++line_;
  Record rec;
  rec.line = line_;
  rec.pair.id = line_id(line_);
  try {
    rec.pair.source = TokenSeq::from_line(src_line);
  } catch (const InvalidArgument& e) {
    throw DataError(source_path_.string(), line_, e.what());
  }
  try {
    rec.pair.target = TokenSeq::from_line(tgt_line);
  } catch (const InvalidArgument& e) {
    throw DataError(target_path_.string(), line_, e.what());
  }
  if (alignment_path_) {
    try {
      rec.alignment = parse_pharaoh(align_line, rec.pair.source.size(),
                                    rec.pair.target.size());
    } catch (const InvalidArgument& e) {
      throw DataError(alignment_path_->string(), line_, e.what());
    }
  }
  return rec;
}

LoadedCorpus load_parallel(const std::filesystem::path& source,
                           const std::filesystem::path& target,
                           const std::optional<std::filesystem::path>& alignment) {
  ParallelReader reader(source, target, alignment);
  LoadedCorpus out;
  out.corpus.provenance = reader.provenance();
  while (auto rec = reader.next()) {
    out.corpus.pairs.push_back(std::move(rec->pair));
    if (rec->alignment) out.alignments.push_back(std::move(*rec->alignment));
  }
  return out;
}

PairScore score_pair(std::string id, const Alignment& alignment) {
  PairScore s;
  s.id = std::move(id);
  s.links = static_cast<std::int64_t>(alignment.size());
  if (alignment.empty()) return s;
  s.anticipation = kernels::anticipation_sum(alignment.links());
  s.aa = static_cast<double>(s.anticipation) / static_cast<double>(s.links);
  return s;
}

void AAAccumulator::add(const PairScore& score) {
  ++total_;
  if (!score.aa) return;
  ++scored_;
  aa_sum_ += *score.aa;
  anticipation_ += score.anticipation;
  links_ += score.links;
  if (*score.aa == 0.0) ++monotonic_;
}

AAReport AAAccumulator::summary() const {
  AAReport r;
  r.total = total_;
  r.scored = scored_;
  r.unscoreable = total_ - scored_;
  r.monotonic_count = monotonic_;
  if (scored_ > 0) {
    r.mean_aa = aa_sum_ / static_cast<double>(scored_);
    r.link_weighted_aa =
        static_cast<double>(anticipation_) / static_cast<double>(links_);
  }
  return r;
}

AAReport score_corpus(const Corpus& corpus, std::span<const Alignment> alignments) {
  require_paired(corpus, alignments);
  AAAccumulator acc;
  std::vector<PairScore> per_pair;
  per_pair.reserve(corpus.pairs.size());
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    auto s = score_pair(corpus.pairs[i].id, alignments[i]);
    acc.add(s);
    per_pair.push_back(std::move(s));
  }
  auto report = acc.summary();
  report.per_pair = std::move(per_pair);
  return report;
}

SelectionSampler::SelectionSampler(std::size_t population, std::size_t sample,
                                   std::uint64_t seed)
    : remaining_(population), needed_(std::min(sample, population)), rng_(seed) {}

bool SelectionSampler::take() {
  if (remaining_ == 0) throw InvalidArgument("sampler population exhausted");
  bool chosen = false;
  if (needed_ == remaining_) {
    chosen = true;
  } else if (needed_ > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, remaining_ - 1);
    chosen = pick(rng_) < needed_;
  }
  --remaining_;
  if (chosen) --needed_;
  return chosen;
}

FilterResult filter_monotonic(const Corpus& corpus,
                              std::span<const Alignment> alignments,
                              const FilterOptions& options) {
  require_paired(corpus, alignments);
  validate_threshold(options);

  std::vector<PairScore> scores;
  scores.reserve(corpus.pairs.size());
  std::size_t eligible_count = 0;
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    scores.push_back(score_pair(corpus.pairs[i].id, alignments[i]));
    if (eligible(scores.back(), options.threshold)) ++eligible_count;
  }

  std::optional<SelectionSampler> sampler;
  if (options.sample_size) {
    sampler.emplace(eligible_count, *options.sample_size, *options.seed);
  }

  FilterResult out;
  out.kept.provenance = corpus.provenance;
  out.stats.total = corpus.pairs.size();
  out.stats.eligible = eligible_count;
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    const auto& s = scores[i];
    if (!s.aa) {
      ++out.stats.dropped_unscoreable;
      out.dropped.push_back({s.id, "unscoreable"});
    } else if (*s.aa > options.threshold) {
      ++out.stats.dropped_above_threshold;
      out.dropped.push_back({s.id, "above threshold"});
    } else if (sampler && !sampler->take()) {
      ++out.stats.dropped_by_sampling;
      out.dropped.push_back({s.id, "not sampled"});
    } else {
      ++out.stats.kept;
      out.kept.pairs.push_back(corpus.pairs[i]);
      out.kept_alignments.push_back(alignments[i]);
    }
  }
  return out;
}

PipelineOutputs PipelineOutputs::for_prefix(const std::string& prefix) {
  return {prefix + ".aa.tsv", prefix + ".kept.src", prefix + ".kept.tgt",
          prefix + ".stats.json"};
}

FilterStats filter_monotonic_files(const std::filesystem::path& source,
                                   const std::filesystem::path& target,
                                   const std::filesystem::path& alignment,
                                   const std::string& prefix,
                                   const FilterOptions& options) {
  validate_threshold(options);

  // Counting pass, only needed to size the sampler.
  std::size_t eligible_count = 0;
  if (options.sample_size) {
    ParallelReader counter(source, target, alignment);
    while (auto rec = counter.next()) {
      if (eligible(score_pair(rec->pair.id, *rec->alignment), options.threshold)) {
        ++eligible_count;
      }
    }
  }
  std::optional<SelectionSampler> sampler;
  if (options.sample_size) {
    sampler.emplace(eligible_count, *options.sample_size, *options.seed);
  }

  const auto outputs = PipelineOutputs::for_prefix(prefix);
  auto aa_out = open_output(outputs.aa_tsv);
  auto src_out = open_output(outputs.kept_source);
  auto tgt_out = open_output(outputs.kept_target);
  aa_out << "id\taa\n";

  ParallelReader reader(source, target, alignment);
  AAAccumulator acc;
  FilterStats stats;
  while (auto rec = reader.next()) {
    const auto s = score_pair(rec->pair.id, *rec->alignment);
    acc.add(s);
    aa_out << s.id << '\t' << aa_cell(s) << '\n';
    ++stats.total;
    if (!s.aa) {
      ++stats.dropped_unscoreable;
    } else if (*s.aa > options.threshold) {
      ++stats.dropped_above_threshold;
    } else {
      ++stats.eligible;
      if (sampler && !sampler->take()) {
        ++stats.dropped_by_sampling;
      } else {
        ++stats.kept;
        src_out << rec->pair.source.join() << '\n';
        tgt_out << rec->pair.target.join() << '\n';
      }
    }
  }

  nlohmann::ordered_json doc;
  doc["inputs"] = reader.provenance();
  doc["filter"] = to_json(stats, options);
  doc["aa"] = to_json(acc.summary());
  auto stats_out = open_output(outputs.stats_json);
  stats_out << doc.dump(2) << '\n';

  for (auto* f : {&aa_out, &src_out, &tgt_out, &stats_out}) {
    f->flush();
    if (!*f) throw DataError("write failed for prefix " + prefix);
  }
  return stats;
}

MetricReport dataset_stats(const Corpus& corpus,
                           std::span<const Alignment> alignments,
                           std::span<const StreamLog> annotation_logs) {
  if (!alignments.empty()) require_paired(corpus, alignments);

  MetricReport report;
  for (std::size_t i = 0; i < corpus.provenance.size(); ++i) {
    const auto& p = corpus.provenance[i];
    const auto eq = p.find('=');
    report.inputs[eq == std::string::npos ? "input" + std::to_string(i)
                                          : p.substr(0, eq)] =
        eq == std::string::npos ? p : p.substr(eq + 1);
  }

  std::unordered_map<std::string, std::size_t> row_of;
  double src_sum = 0.0;
  double tgt_sum = 0.0;
  std::size_t non_empty = 0;
  AAAccumulator acc;
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    const auto& pair = corpus.pairs[i];
    SentenceMetrics row{pair.id, {}};
    row.values["source_len"] = static_cast<double>(pair.source.size());
    row.values["target_len"] = static_cast<double>(pair.target.size());
    if (!pair.source.empty()) {
      src_sum += static_cast<double>(pair.source.size());
      tgt_sum += static_cast<double>(pair.target.size());
      ++non_empty;
    }
    if (!alignments.empty()) {
      const auto s = score_pair(pair.id, alignments[i]);
      acc.add(s);
      if (s.aa) row.values["aa"] = *s.aa;
    }
    row_of.emplace(pair.id, report.per_sentence.size());
    report.per_sentence.push_back(std::move(row));
  }

  report.corpus["sentences"] = static_cast<double>(corpus.pairs.size());
  report.corpus["empty_source"] = static_cast<double>(corpus.pairs.size() - non_empty);
  if (non_empty > 0) {
    report.corpus["al_full_sentence"] = src_sum / static_cast<double>(non_empty);
    report.corpus["mean_target_len"] = tgt_sum / static_cast<double>(non_empty);
  }
  if (!alignments.empty()) {
    const auto aa = acc.summary();
    report.corpus["aa_scored"] = static_cast<double>(aa.scored);
    report.corpus["aa_unscoreable"] = static_cast<double>(aa.unscoreable);
    report.corpus["monotonic_count"] = static_cast<double>(aa.monotonic_count);
    if (aa.mean_aa) report.corpus["mean_aa"] = *aa.mean_aa;
  }

  if (!annotation_logs.empty()) {
    double al_sum = 0.0;
    std::size_t al_count = 0;
    for (const auto& log : annotation_logs) {
      const auto profile = delays_from_log(log);
      if (profile.target_len == 0) continue;
      const double al = average_lagging(profile);
      al_sum += al;
      ++al_count;
      const auto it = row_of.find(log.id());
      if (it == row_of.end()) {
        row_of.emplace(log.id(), report.per_sentence.size());
        report.per_sentence.push_back({log.id(), {{"annotation_al", al}}});
      } else {
        report.per_sentence[it->second].values["annotation_al"] = al;
      }
    }
    report.corpus["annotation_logs"] = static_cast<double>(al_count);
    if (al_count > 0) report.corpus["annotation_al"] = al_sum / static_cast<double>(al_count);
  }
  return report;
}

}  // namespace simulmt

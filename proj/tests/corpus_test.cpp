#include "simulmt/corpus.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "simulmt/report.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace simulmt {
namespace {

using testing::TempDir;
using testing::write_file;

struct Files {
  std::filesystem::path src, tgt, align;
};

Files write_corpus(const TempDir& dir, const testing::PlantedCorpus& pc) {
  std::string s, t, a;
  for (std::size_t i = 0; i < pc.corpus.pairs.size(); ++i) {
    s += pc.corpus.pairs[i].source.join() + "\n";
    t += pc.corpus.pairs[i].target.join() + "\n";
    a += testing::pharaoh_line(pc.alignments[i]) + "\n";
  }
  Files f{dir / "c.src", dir / "c.tgt", dir / "c.align"};
  write_file(f.src, s);
  write_file(f.tgt, t);
  write_file(f.align, a);
  return f;
}

std::optional<double> brute_aa(const Alignment& a) {
  if (a.empty()) return std::nullopt;
  std::vector<std::pair<long, long>> pairs;
  for (const auto& l : a.links()) pairs.emplace_back(l.source, l.target);
  return testing::oracle_aa(pairs);
}

TEST(LoadParallel, ThreeLines) {
  TempDir dir;
  write_file(dir / "s", "And this\nmade me\nsad\n");
  write_file(dir / "t", "这 使\n我\n难过\n");
  write_file(dir / "a", "0-0 1-1\n0-0\n0-0\n");
  const auto loaded = load_parallel(dir / "s", dir / "t", dir / "a");
  ASSERT_EQ(loaded.corpus.pairs.size(), 3u);
  ASSERT_EQ(loaded.alignments.size(), 3u);
  EXPECT_EQ(loaded.corpus.pairs[0].id, "line-1");
  EXPECT_EQ(loaded.corpus.pairs[2].target, TokenSeq{"难过"});
  EXPECT_EQ(loaded.corpus.provenance.size(), 3u);
}

TEST(LoadParallel, CountMismatchNamesBothCounts) {
  TempDir dir;
  write_file(dir / "s", "a\nb\nc\n");
  write_file(dir / "t", "x\ny\n");
  try {
    load_parallel(dir / "s", dir / "t");
    FAIL();
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("has 3 lines"), std::string::npos) << msg;
    EXPECT_NE(msg.find("has 2"), std::string::npos) << msg;
  }
}

TEST(LoadParallel, TrailingBlankAlignmentLineIsEmpty) {
  TempDir dir;
  write_file(dir / "s", "a b\nc d\n");
  write_file(dir / "t", "x y\nz w\n");
  write_file(dir / "a", "0-0 1-1\n\n");
  const auto loaded = load_parallel(dir / "s", dir / "t", dir / "a");
  ASSERT_EQ(loaded.alignments.size(), 2u);
  EXPECT_TRUE(loaded.alignments[1].empty());
  const auto report = score_corpus(loaded.corpus, loaded.alignments);
  EXPECT_EQ(report.unscoreable, 1u);
  EXPECT_FALSE(report.per_pair[1].aa.has_value());
  EXPECT_EQ(aa_cell(report.per_pair[1]), "NA");
}

TEST(LoadParallel, BadAlignmentNamesFileAndLine) {
  TempDir dir;
  write_file(dir / "s", "a b\nc d\n");
  write_file(dir / "t", "x y\nz w\n");
  write_file(dir / "a", "0-0\n5-0\n");
  try {
    load_parallel(dir / "s", dir / "t", dir / "a");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find((dir / "a").string() + ":2:"), std::string::npos)
        << e.what();
  }
}

TEST(LoadParallel, MissingFile) {
  TempDir dir;
  EXPECT_THROW(load_parallel(dir / "nope", dir / "nope2"), DataError);
}

TEST(ScoreCorpus, IdentityCorpus) {
  Corpus c;
  std::vector<Alignment> al;
  for (int i = 0; i < 4; ++i) {
    c.pairs.push_back({line_id(i + 1), TokenSeq{"a", "b"}, TokenSeq{"x", "y"}});
    al.emplace_back(std::vector<Link>{{0, 0}, {1, 1}}, 2, 2);
  }
  const auto r = score_corpus(c, al);
  EXPECT_EQ(r.mean_aa, std::optional<double>(0.0));
  EXPECT_EQ(r.monotonic_count, r.total);
}

TEST(ScoreCorpus, PlantedHalf) {
  Corpus c;
  std::vector<Alignment> al;
  for (int i = 0; i < 10; ++i) {
    c.pairs.push_back({line_id(i + 1), TokenSeq{"a", "b"}, TokenSeq{"x"}});
    if (i % 2) {
      al.emplace_back(std::vector<Link>{{1, 0}}, 2, 1);
    } else {
      al.emplace_back(std::vector<Link>{{0, 0}}, 2, 1);
    }
  }
  const auto r = score_corpus(c, al);
  EXPECT_DOUBLE_EQ(*r.mean_aa, 0.5);
  EXPECT_EQ(r.monotonic_count, 5u);
  EXPECT_EQ(r.total, 10u);
}

TEST(ScoreCorpus, EmptyAlignmentExcludedFromMean) {
  Corpus c;
  c.pairs = {{"a", TokenSeq{"a", "b"}, TokenSeq{"x"}}, {"b", TokenSeq{"a"}, TokenSeq{"x"}}};
  std::vector<Alignment> al{Alignment({{1, 0}}, 2, 1), Alignment({}, 1, 1)};
  const auto r = score_corpus(c, al);
  EXPECT_DOUBLE_EQ(*r.mean_aa, 1.0);
  EXPECT_EQ(r.scored, 1u);
  EXPECT_EQ(r.unscoreable, 1u);
  EXPECT_EQ(r.total, 2u);
}

TEST(ScoreCorpusProperty, MeanRecomputableFromPerPair) {
  std::mt19937_64 rng(41);
  const auto pc = testing::planted_corpus(rng, 300);
  const auto r = score_corpus(pc.corpus, pc.alignments);
  double sum = 0;
  std::size_t n = 0;
  std::size_t mono = 0;
  for (const auto& p : r.per_pair) {
    if (!p.aa) continue;
    sum += *p.aa;
    ++n;
    mono += *p.aa == 0.0;
  }
  EXPECT_NEAR(*r.mean_aa, sum / static_cast<double>(n), 1e-12);
  EXPECT_EQ(r.monotonic_count, mono);
}

TEST(FilterMonotonic, ThresholdZeroKeepsIdentityHalf) {
  std::mt19937_64 rng(42);
  const auto pc = testing::planted_corpus(rng, 400);
  const auto res = filter_monotonic(pc.corpus, pc.alignments);
  std::vector<std::string> expected;
  std::size_t unscoreable = 0;
  for (std::size_t i = 0; i < pc.alignments.size(); ++i) {
    const auto aa = brute_aa(pc.alignments[i]);
    if (!aa) ++unscoreable;
    if (aa && *aa == 0.0) expected.push_back(pc.corpus.pairs[i].id);
  }
  std::vector<std::string> kept;
  for (const auto& p : res.kept.pairs) kept.push_back(p.id);
  EXPECT_EQ(kept, expected);
  EXPECT_EQ(res.stats.kept, expected.size());
  EXPECT_EQ(res.stats.dropped_unscoreable, unscoreable);
  EXPECT_EQ(res.stats.total, 400u);
  EXPECT_EQ(res.stats.kept + res.stats.dropped_above_threshold + res.stats.dropped_unscoreable,
            res.stats.total);
  for (const auto& d : res.dropped) {
    if (d.reason == "unscoreable") continue;
    EXPECT_EQ(d.reason, "above threshold");
  }
}

TEST(FilterMonotonic, InfiniteThresholdKeepsAllScoreable) {
  std::mt19937_64 rng(43);
  const auto pc = testing::planted_corpus(rng, 200);
  FilterOptions opt;
  opt.threshold = std::numeric_limits<double>::infinity();
  const auto res = filter_monotonic(pc.corpus, pc.alignments, opt);
  EXPECT_EQ(res.stats.kept, res.stats.total - res.stats.dropped_unscoreable);
  EXPECT_EQ(res.stats.dropped_above_threshold, 0u);
}

TEST(FilterMonotonic, OptionValidation) {
  Corpus c;
  FilterOptions nan;
  nan.threshold = std::nan("");
  EXPECT_THROW(filter_monotonic(c, {}, nan), InvalidArgument);
  FilterOptions unseeded;
  unseeded.sample_size = 3;
  EXPECT_THROW(filter_monotonic(c, {}, unseeded), InvalidArgument);
}

TEST(FilterMonotonic, SamplingIsSeededAndExact) {
  std::mt19937_64 rng(44);
  const auto pc = testing::planted_corpus(rng, 300);
  FilterOptions opt;
  opt.sample_size = 25;
  opt.seed = 99;
  const auto a = filter_monotonic(pc.corpus, pc.alignments, opt);
  const auto b = filter_monotonic(pc.corpus, pc.alignments, opt);
  EXPECT_EQ(a.stats.kept, 25u);
  EXPECT_EQ(a.kept.pairs, b.kept.pairs);
  EXPECT_EQ(a.stats.dropped_by_sampling, a.stats.eligible - 25);
  opt.seed = 100;
  const auto c = filter_monotonic(pc.corpus, pc.alignments, opt);
  EXPECT_NE(a.kept.pairs, c.kept.pairs);
}

TEST(SelectionSamplerProperty, TakesExactlyTheSampleSize) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t population = 1 + seed % 37;
    const std::size_t sample = seed % 41;
    SelectionSampler s(population, sample, seed);
    std::size_t taken = 0;
    for (std::size_t i = 0; i < population; ++i) taken += s.take();
    ASSERT_EQ(taken, std::min(sample, population));
  }
}

TEST(FilterFiles, MatchesInMemoryFilter) {
  TempDir dir;
  std::mt19937_64 rng(45);
  const auto pc = testing::planted_corpus(rng, 250);
  const auto f = write_corpus(dir, pc);
  const auto prefix = (dir / "out").string();
  for (const bool sample : {false, true}) {
    FilterOptions opt;
    if (sample) {
      opt.sample_size = 40;
      opt.seed = 5;
    }
    const auto stats = filter_monotonic_files(f.src, f.tgt, f.align, prefix, opt);
    const auto loaded = load_parallel(f.src, f.tgt, f.align);
    const auto mem = filter_monotonic(loaded.corpus, loaded.alignments, opt);
    EXPECT_EQ(stats.kept, mem.stats.kept);
    EXPECT_EQ(stats.eligible, mem.stats.eligible);
    EXPECT_EQ(stats.dropped_by_sampling, mem.stats.dropped_by_sampling);
    std::string src;
    for (const auto& p : mem.kept.pairs) src += p.source.join() + "\n";
    const auto outputs = PipelineOutputs::for_prefix(prefix);
    EXPECT_EQ(testing::read_file(outputs.kept_source), src);

    const auto tsv = testing::read_file(outputs.aa_tsv);
    EXPECT_EQ(tsv.rfind("id\taa\n", 0), 0u);
    EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 251);
    const auto doc = nlohmann::json::parse(testing::read_file(outputs.stats_json));
    EXPECT_EQ(doc["filter"]["kept"], stats.kept);
    EXPECT_EQ(doc["aa"]["total"], 250);
  }
}

TEST(DatasetStats, Examples) {
  Corpus c;
  c.pairs = {{"line-1", TokenSeq{"a", "b", "c", "d"}, TokenSeq{"x"}},
             {"line-2", TokenSeq{"a", "b", "c", "d", "e", "f"}, TokenSeq{"y", "z"}}};
  auto r = dataset_stats(c);
  EXPECT_DOUBLE_EQ(r.corpus.at("al_full_sentence"), 5.0);
  EXPECT_FALSE(r.corpus.contains("mean_aa"));

  std::vector<Alignment> al{Alignment({{0, 0}}, 4, 1), Alignment({{0, 0}, {1, 1}}, 6, 2)};
  r = dataset_stats(c, al);
  EXPECT_DOUBLE_EQ(r.corpus.at("mean_aa"), 0.0);
  EXPECT_DOUBLE_EQ(r.corpus.at("monotonic_count"), 2.0);
}

TEST(DatasetStats, AnnotationAlFromLogs) {
  Corpus c;
  c.pairs = {{"table2", testing::kTable2Source, testing::kTable2Target}};
  const std::vector<StreamLog> logs{testing::table2_log()};
  const auto r = dataset_stats(c, {}, logs);
  EXPECT_DOUBLE_EQ(r.corpus.at("annotation_al"), 1.625);
  EXPECT_DOUBLE_EQ(r.per_sentence[0].values.at("annotation_al"), 1.625);
}

TEST(DatasetStats, FullSentenceAnnotationMatchesSourceLength) {
  // Reading the whole source before writing gives AL == |x|, so the
  // full-sentence statistic and annotation AL agree on such logs.
  std::mt19937_64 rng(46);
  Corpus c;
  std::vector<StreamLog> logs;
  for (int i = 0; i < 20; ++i) {
    const auto src = testing::random_tokens(rng, 1, 15);
    const auto tgt = testing::random_tokens(rng, 1, 15);
    std::vector<Action> actions;
    for (const auto& t : src) actions.emplace_back(Read{t});
    for (const auto& t : tgt) actions.emplace_back(Write{t});
    c.pairs.push_back({line_id(i + 1), src, tgt});
    logs.emplace_back(line_id(i + 1), LogMode::kStreaming, std::move(actions));
  }
  const auto r = dataset_stats(c, {}, logs);
  EXPECT_NEAR(r.corpus.at("annotation_al"), r.corpus.at("al_full_sentence"), 1e-12);
}

}  // namespace
}  // namespace simulmt

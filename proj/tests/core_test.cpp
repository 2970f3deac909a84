#include "simulmt/core.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"
#include "support/generators.hpp"

namespace simulmt {
namespace {

using testing::kTable2Record;
using testing::table2_log;

TEST(TokenSeq, RejectsEmptyAndWhitespaceTokens) {
  EXPECT_THROW(TokenSeq({""}), InvalidArgument);
  EXPECT_THROW(TokenSeq({"a b"}), InvalidArgument);
  EXPECT_THROW(TokenSeq({"tab\there"}), InvalidArgument);
  EXPECT_THROW(TokenSeq({std::string("\xff\xfe")}), InvalidArgument);
  EXPECT_NO_THROW(TokenSeq({"难过", "ok"}));
  EXPECT_TRUE(TokenSeq().empty());
}

TEST(TokenSeq, FromLineSplitsOnAsciiWhitespace) {
  const auto seq = TokenSeq::from_line("  And\tthis  made\r");
  ASSERT_EQ(seq.size(), 3u);
  EXPECT_EQ(seq[0], "And");
  EXPECT_EQ(seq[2], "made");
  EXPECT_EQ(seq.join(), "And this made");
  EXPECT_TRUE(TokenSeq::from_line("   ").empty());
}

TEST(TokenSeq, UnicodeBytesArePreserved) {
  // NFC "é" and NFD "e" + combining acute stay distinct.
  const auto seq = TokenSeq::from_line("\xc3\xa9 e\xcc\x81");
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_NE(seq[0], seq[1]);
}

TEST(ParseStreamLog, MinimalLog) {
  const auto log = parse_stream_log(R"({"id":"s1","mode":"streaming","actions":[["R","And"],["W","这"]]})");
  EXPECT_EQ(log.id(), "s1");
  EXPECT_EQ(log.mode(), LogMode::kStreaming);
  EXPECT_EQ(log.read_count(), 1u);
  EXPECT_EQ(log.write_count(), 1u);
}

TEST(ParseStreamLog, FirstActionMustBeRead) {
  try {
    parse_stream_log(R"({"id":"s1","mode":"streaming","actions":[["W","这"]]})");
    FAIL() << "expected InvalidLog";
  } catch (const InvalidLog& e) {
    ASSERT_TRUE(e.index().has_value());
    EXPECT_EQ(*e.index(), 0u);
  }
}

TEST(ParseStreamLog, EmptyActionsRejected) {
  EXPECT_THROW(parse_stream_log(R"({"id":"s","mode":"streaming","actions":[]})"), InvalidLog);
  EXPECT_THROW(StreamLog("s", LogMode::kStreaming, {}), InvalidLog);
}

TEST(ParseStreamLog, ModeActionMismatchNamesIndex) {
  try {
    parse_stream_log(R"({"id":"s","mode":"streaming","actions":[["R","a"],["R","b"],["H",["x"]]]})");
    FAIL();
  } catch (const InvalidLog& e) {
    EXPECT_EQ(e.index(), std::optional<std::size_t>(2));
  }
  try {
    parse_stream_log(R"({"id":"s","mode":"retranslation","actions":[["R","a"],["W","x"]]})");
    FAIL();
  } catch (const InvalidLog& e) {
    EXPECT_EQ(e.index(), std::optional<std::size_t>(1));
  }
}

TEST(ParseStreamLog, AtMostOneSnapshotPerRead) {
  EXPECT_NO_THROW(parse_stream_log(
      R"({"id":"s","mode":"retranslation","actions":[["R","a"],["H",["x"]],["R","b"],["H",[]]]})"));
  try {
    parse_stream_log(
        R"({"id":"s","mode":"retranslation","actions":[["R","a"],["H",["x"]],["H",["y"]]]})");
    FAIL();
  } catch (const InvalidLog& e) {
    EXPECT_EQ(e.index(), std::optional<std::size_t>(2));
  }
}

TEST(ParseStreamLog, MalformedRecords) {
  EXPECT_THROW(parse_stream_log("not json"), ParseError);
  EXPECT_THROW(parse_stream_log("[]"), ParseError);
  EXPECT_THROW(parse_stream_log(R"({"mode":"streaming","actions":[["R","a"]]})"), ParseError);
  EXPECT_THROW(parse_stream_log(R"({"id":"s","mode":"batch","actions":[["R","a"]]})"), ParseError);
  EXPECT_THROW(parse_stream_log(R"({"id":"s","mode":"streaming","actions":[["X","a"]]})"), ParseError);
  EXPECT_THROW(parse_stream_log(R"({"id":"s","mode":"streaming","actions":[["R"]]})"), ParseError);
  EXPECT_THROW(parse_stream_log(R"({"id":"s","mode":"streaming","actions":[["R",1]]})"), ParseError);
  EXPECT_THROW(parse_stream_log(R"({"id":"s","mode":"streaming","actions":[["R","a"]],"x":1})"),
               ParseError);
  EXPECT_THROW(parse_stream_log(R"({"id":"s","mode":"streaming","actions":[["R","a b"]]})"),
               InvalidLog);
}

TEST(SerializeStreamLog, Table2IsOneLineWithNineActions) {
  const auto log = table2_log();
  EXPECT_EQ(log.read_count(), 5u);
  EXPECT_EQ(log.write_count(), 4u);
  const auto line = serialize_stream_log(log);
  EXPECT_EQ(line, kTable2Record);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(parse_stream_log(line).actions().size(), 9u);
}

TEST(SerializeStreamLog, SnapshotEncoding) {
  const StreamLog log("h", LogMode::kRetranslation,
                      {Read{"a"}, Snapshot{TokenSeq{"x", "y"}}, Read{"b"}, Snapshot{TokenSeq{}}});
  EXPECT_EQ(serialize_stream_log(log),
            R"({"id":"h","mode":"retranslation","actions":[["R","a"],["H",["x","y"]],["R","b"],["H",[]]]})");
}

TEST(SerializeStreamLog, KeyOrderOfInputDoesNotMatter) {
  const auto log = parse_stream_log(R"({"actions":[["R","a"]],"mode":"streaming","id":"z"})");
  EXPECT_EQ(serialize_stream_log(log), R"({"id":"z","mode":"streaming","actions":[["R","a"]]})");
}

TEST(StreamLogProperty, RoundTripOverRandomLogs) {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 1000; ++i) {
    const auto log = (i % 3 == 0)
                         ? testing::random_retranslation_log(rng, "h" + std::to_string(i))
                         : testing::random_streaming_log(rng, "s" + std::to_string(i));
    const auto line = serialize_stream_log(log);
    const auto parsed = parse_stream_log(line);
    ASSERT_EQ(parsed, log) << line;
    ASSERT_EQ(serialize_stream_log(parsed), line);
  }
}

TEST(StreamLog, SourceAndTargetStreams) {
  const auto log = table2_log();
  EXPECT_EQ(log.source_stream(), testing::kTable2Source);
  EXPECT_EQ(log.target_stream(), testing::kTable2Target);
}

}  // namespace
}  // namespace simulmt

#pragma once

// Streaming annotation protocol: an annotator starts with the first source
// word exposed and then chooses READ (reveal the next word) or WRITE (commit
// one target word). Committed words can never be changed. A sentence can be
// finished only once every source word has been read.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "simulmt/core.hpp"
#include "simulmt/errors.hpp"

namespace simulmt {

/// Request that is malformed or breaks a protocol rule (HTTP 400).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Action not allowed in the session's current state (HTTP 409).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Unknown session id (HTTP 404).
class NotFound : public Error {
 public:
  using Error::Error;
};

enum class SessionState { kActive, kFinished };

std::string_view to_string(SessionState state);

class AnnotationSession {
 public:
  /// Applies the first Read. Throws ProtocolError on an empty source.
  AnnotationSession(std::string session_id, std::string item_id, TokenSeq source);

  /// Reveals the next source word. Throws StateError when finished or when
  /// the source is exhausted.
  const std::string& read();

  /// Appends one target word. Throws ProtocolError for an illegal token and
  /// StateError when finished.
  const TokenSeq& write(std::string token);

  /// Throws StateError naming the unread count unless every word is read.
  StreamLog finish();

  const std::string& session_id() const { return session_id_; }
  const std::string& item_id() const { return item_id_; }
  SessionState state() const { return state_; }
  std::size_t reads_done() const { return reads_done_; }
  bool finishable() const { return reads_done_ == source_.size(); }
  /// Exactly the source words revealed so far.
  TokenSeq exposed() const { return source_.prefix(reads_done_); }
  const TokenSeq& written() const { return written_; }
  const std::vector<Action>& events() const { return events_; }

  /// The events so far as a streaming log with id item_id().
  StreamLog log() const;

  /// Full source; for persistence and export, never for display.
  const TokenSeq& source() const { return source_; }

  friend bool operator==(const AnnotationSession&, const AnnotationSession&) = default;

 private:
  void require_active() const;

  std::string session_id_;
  std::string item_id_;
  TokenSeq source_;
  std::size_t reads_done_ = 0;
  TokenSeq written_;
  std::vector<Action> events_;
  SessionState state_ = SessionState::kActive;
};

struct RatingRecord {
  std::string item_id;
  std::string rater_id;
  int score = 0;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

/// Validates 1 <= score <= 5 and non-empty ids; throws ProtocolError.
RatingRecord make_rating(std::string item_id, std::string rater_id, int score);

struct ApReport {
  /// Share of items whose mean score over raters is >= threshold.
  double ap = 0.0;
  std::size_t items = 0;
  /// Per rater: share of that rater's items scored >= threshold.
  std::map<std::string, double> per_rater;
  int threshold = 3;
};

/// Acceptability rate. A later rating of the same (item, rater) replaces an
/// earlier one. Throws InvalidArgument when there are no ratings or the
/// threshold is outside [1, 5].
ApReport ap_rate(std::span<const RatingRecord> records, int threshold = 3);

/// Files produced by an export, both byte-stable for identical state.
struct AnnotationExport {
  std::string references;  // one line per session: committed target words
  std::string logs;        // one JSONL stream log per session
};

/// Builds the export from finished sessions in the given order. Throws
/// StateError listing the ids of unfinished sessions.
AnnotationExport export_annotations(std::span<const AnnotationSession> sessions);

/// Append-only event journal (one JSON object per line). Each append is a
/// single write(2) on an O_APPEND descriptor.
class JournalFile {
 public:
  explicit JournalFile(const std::filesystem::path& path);
  ~JournalFile();
  JournalFile(const JournalFile&) = delete;
  JournalFile& operator=(const JournalFile&) = delete;

  void append(const std::string& line);

 private:
  int fd_ = -1;
  std::filesystem::path path_;
};

/// Rebuilds a session from its journal. A trailing line without newline
/// (interrupted append) is ignored.
AnnotationSession replay_session_journal(const std::filesystem::path& path);

/// Thread-safe set of sessions and ratings with optional durable journal.
/// Actions on one session are serialized; different sessions proceed
/// concurrently.
class SessionStore {
 public:
  /// Recovers existing sessions and ratings when the directory has journals.
  explicit SessionStore(std::optional<std::filesystem::path> journal_dir = std::nullopt);
  ~SessionStore();

  AnnotationSession create(const TokenSeq& source,
                           std::optional<std::string> item_id = std::nullopt);

  // `expected_events`, when given, must equal the session's current event
  // count or the action fails with StateError (a stale second client).
  std::string read(const std::string& session_id,
                   std::optional<std::size_t> expected_events = std::nullopt);
  TokenSeq write(const std::string& session_id, std::string token,
                 std::optional<std::size_t> expected_events = std::nullopt);
  StreamLog finish(const std::string& session_id,
                   std::optional<std::size_t> expected_events = std::nullopt);

  /// Consistent copy of one session. Throws NotFound.
  AnnotationSession get(const std::string& session_id) const;
  /// Copies of all sessions in creation order.
  std::vector<AnnotationSession> sessions() const;

  RatingRecord submit_rating(std::string item_id, std::string rater_id, int score);
  std::vector<RatingRecord> ratings() const;

  AnnotationExport export_all() const;

 private:
  struct Entry;

  template <typename Fn>
  auto mutate(const std::string& session_id, std::optional<std::size_t> expected,
              const std::string& journal_line, Fn&& fn);
  Entry& find(const std::string& session_id) const;
  void recover();

  std::optional<std::filesystem::path> journal_dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::unique_ptr<Entry>> entries_;
  std::vector<std::string> order_;
  std::uint64_t next_id_ = 1;

  mutable std::mutex ratings_mutex_;
  std::vector<RatingRecord> ratings_;
  std::unique_ptr<JournalFile> ratings_journal_;
};

}  // namespace simulmt

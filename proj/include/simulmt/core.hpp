#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "simulmt/errors.hpp"

namespace simulmt {

/// True when `token` is non-empty, valid UTF-8 and free of ASCII whitespace.
bool is_valid_token(std::string_view token);

/// Ordered sequence of opaque tokens. Construction validates every token;
/// bytes are kept exactly as given.
class TokenSeq {
 public:
  TokenSeq() = default;
  explicit TokenSeq(std::vector<std::string> tokens);
  TokenSeq(std::initializer_list<std::string> tokens);

  /// Splits a pre-tokenized line on ASCII whitespace.
  static TokenSeq from_line(std::string_view line);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Returns the first `n` tokens (all of them when n >= size()).
  TokenSeq prefix(std::size_t n) const;
  void push_back(std::string token);

  /// Space-joined form, as written to plain-text corpus files.
  std::string join() const;

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;

 private:
  std::vector<std::string> tokens_;
};

struct SentencePair {
  std::string id;
  TokenSeq source;
  TokenSeq target;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct Read {
  std::string token;
  friend bool operator==(const Read&, const Read&) = default;
};

struct Write {
  std::string token;
  friend bool operator==(const Write&, const Write&) = default;
};

/// Full hypothesis shown by a re-translation system after a Read.
struct Snapshot {
  TokenSeq hypothesis;
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

using Action = std::variant<Read, Write, Snapshot>;

enum class LogMode { kStreaming, kRetranslation };

std::string_view to_string(LogMode mode);
LogMode log_mode_from_string(std::string_view name);

/// One rule violation found in a log. `index` is an action index, or a
/// source index for source-conformance violations (see the message).
struct Violation {
  std::optional<std::size_t> index;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks first-action, mode and snapshot-placement rules, plus token
/// validity of Read/Write payloads.
std::vector<Violation> check_actions(LogMode mode,
                                     const std::vector<Action>& actions);

/// Recorded READ/WRITE (or READ/snapshot) history of one sentence.
/// Immutable once constructed; the constructor throws InvalidLog when any
/// rule from check_actions is broken.
class StreamLog {
 public:
  StreamLog(std::string id, LogMode mode, std::vector<Action> actions);

  const std::string& id() const { return id_; }
  LogMode mode() const { return mode_; }
  const std::vector<Action>& actions() const { return actions_; }

  std::size_t read_count() const;
  std::size_t write_count() const;
  /// Tokens of all Read actions in order.
  TokenSeq source_stream() const;
  /// Tokens of all Write actions in order (streaming logs).
  TokenSeq target_stream() const;

  friend bool operator==(const StreamLog&, const StreamLog&) = default;

 private:
  std::string id_;
  LogMode mode_;
  std::vector<Action> actions_;
};

/// Decodes one JSONL record. Throws ParseError for malformed JSON or
/// shape, InvalidLog for rule violations.
StreamLog parse_stream_log(std::string_view line);

/// Canonical one-line record, without trailing newline.
std::string serialize_stream_log(const StreamLog& log);

}  // namespace simulmt

#include "simulmt/annotation.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

namespace simulmt {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kSessionPrefix = "sess-";
constexpr std::string_view kRatingsFile = "ratings.jsonl";

std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::strict);
}

std::string create_line(const AnnotationSession& s) {
  ordered_json j;
  j["op"] = "create";
  j["session_id"] = s.session_id();
  j["item_id"] = s.item_id();
  j["source"] = s.source().tokens();
  return dump(j);
}

std::string op_line(std::string_view op) {
  ordered_json j;
  j["op"] = op;
  return dump(j);
}

std::string write_line(const std::string& token) {
  ordered_json j;
  j["op"] = "write";
  j["token"] = token;
  return dump(j);
}

std::string rating_line(const RatingRecord& r) {
  ordered_json j;
  j["item_id"] = r.item_id;
  j["rater_id"] = r.rater_id;
  j["score"] = r.score;
  return dump(j);
}

// Complete lines of a journal; an unterminated last line is an interrupted
// append and is dropped.
std::vector<std::string> journal_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open journal " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = content.find('\n', start);
    if (nl == std::string::npos) break;
    if (nl > start) lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::optional<std::uint64_t> session_number(std::string_view id) {
  if (!id.starts_with(kSessionPrefix)) return std::nullopt;
  const auto digits = id.substr(kSessionPrefix.size());
  if (digits.empty() ||
      !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::stoull(std::string(digits));
}

}  // namespace

std::string_view to_string(SessionState state) {
  return state == SessionState::kActive ? "active" : "finished";
}

AnnotationSession::AnnotationSession(std::string session_id, std::string item_id,
                                     TokenSeq source)
    : session_id_(std::move(session_id)),
      item_id_(std::move(item_id)),
      source_(std::move(source)) {
  if (source_.empty()) throw ProtocolError("source must contain at least one token");
  reads_done_ = 1;
  events_.emplace_back(Read{source_[0]});
}

void AnnotationSession::require_active() const {
  if (state_ == SessionState::kFinished) {
    throw StateError("session " + session_id_ + " is finished");
  }
}

const std::string& AnnotationSession::read() {
  require_active();
  if (reads_done_ == source_.size()) {
    throw StateError("all words read in session " + session_id_);
  }
  const auto& token = source_[reads_done_++];
  events_.emplace_back(Read{token});
  return token;
}

const TokenSeq& AnnotationSession::write(std::string token) {
  require_active();
  if (!is_valid_token(token)) {
    throw ProtocolError("illegal target token: tokens must be non-empty UTF-8 "
                        "without whitespace");
  }
  events_.emplace_back(Write{token});
  written_.push_back(std::move(token));
  return written_;
}

StreamLog AnnotationSession::finish() {
  require_active();
  if (!finishable()) {
    const auto unread = source_.size() - reads_done_;
    throw StateError(std::to_string(unread) + " source tokens unread");
  }
  state_ = SessionState::kFinished;
  return log();
}

StreamLog AnnotationSession::log() const {
  return StreamLog(item_id_, LogMode::kStreaming, events_);
}

RatingRecord make_rating(std::string item_id, std::string rater_id, int score) {
  if (item_id.empty()) throw ProtocolError("item_id must be non-empty");
  if (rater_id.empty()) throw ProtocolError("rater_id must be non-empty");
  if (score < 1 || score > 5) {
    throw ProtocolError("score " + std::to_string(score) + " outside [1, 5]");
  }
  return {std::move(item_id), std::move(rater_id), score};
}

ApReport ap_rate(std::span<const RatingRecord> records, int threshold) {
  if (threshold < 1 || threshold > 5) {
    throw InvalidArgument("threshold " + std::to_string(threshold) + " outside [1, 5]");
  }
  if (records.empty()) throw InvalidArgument("no ratings; acceptability is undefined");

  // item -> rater -> score, last rating wins.
  std::map<std::string, std::map<std::string, int>> by_item;
  for (const auto& r : records) by_item[r.item_id][r.rater_id] = r.score;

  ApReport out;
  out.threshold = threshold;
  out.items = by_item.size();
  std::size_t accepted = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> rater_counts;
  for (const auto& [item, raters] : by_item) {
    long sum = 0;
    for (const auto& [rater, score] : raters) {
      sum += score;
      auto& c = rater_counts[rater];
      ++c.second;
      if (score >= threshold) ++c.first;
    }
    // mean >= threshold  <=>  sum >= threshold * count (exact).
    if (sum >= static_cast<long>(threshold) * static_cast<long>(raters.size())) ++accepted;
  }
  out.ap = static_cast<double>(accepted) / static_cast<double>(out.items);
  for (const auto& [rater, c] : rater_counts) {
    out.per_rater[rater] = static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return out;
}

AnnotationExport export_annotations(std::span<const AnnotationSession> sessions) {
  std::vector<std::string> unfinished;
  for (const auto& s : sessions) {
    if (s.state() != SessionState::kFinished) unfinished.push_back(s.session_id());
  }
  if (!unfinished.empty()) {
    std::string msg = "unfinished sessions:";
    for (const auto& id : unfinished) msg += " " + id;
    throw StateError(msg);
  }
  AnnotationExport out;
  for (const auto& s : sessions) {
    out.references += s.written().join() + "\n";
    out.logs += serialize_stream_log(s.log()) + "\n";
  }
  return out;
}

JournalFile::JournalFile(const std::filesystem::path& path) : path_(path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw DataError("cannot open journal " + path.string() + ": " + std::strerror(errno));
  }
}

JournalFile::~JournalFile() {
  if (fd_ >= 0) ::close(fd_);
}

void JournalFile::append(const std::string& line) {
  const std::string record = line + "\n";
  const char* p = record.data();
  std::size_t left = record.size();
  while (left > 0) {
    const auto n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw DataError("journal append failed for " + path_.string() + ": " +
                      std::strerror(errno));
    }
    p += n;
    left -= static_cast<std::size_t>(n);
  }
}

AnnotationSession replay_session_journal(const std::filesystem::path& path) {
  const auto lines = journal_lines(path);
  if (lines.empty()) throw DataError(path.string(), 1, "journal has no create record");
  std::optional<AnnotationSession> session;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      const auto j = json::parse(lines[i]);
      const auto op = j.at("op").get<std::string>();
      if (i == 0) {
        if (op != "create") throw DataError("first record is not a create");
        session.emplace(j.at("session_id").get<std::string>(),
                        j.at("item_id").get<std::string>(),
                        TokenSeq(j.at("source").get<std::vector<std::string>>()));
      } else if (op == "read") {
        session->read();
      } else if (op == "write") {
        session->write(j.at("token").get<std::string>());
      } else if (op == "finish") {
        session->finish();
      } else {
        throw DataError("unknown op '" + op + "'");
      }
    } catch (const DataError& e) {
      throw DataError(path.string(), i + 1, e.what());
    } catch (const std::exception& e) {
      throw DataError(path.string(), i + 1, e.what());
    }
  }
  return std::move(*session);
}

struct SessionStore::Entry {
  std::mutex mutex;
  AnnotationSession session;
  std::unique_ptr<JournalFile> journal;
};

SessionStore::SessionStore(std::optional<std::filesystem::path> journal_dir)
    : journal_dir_(std::move(journal_dir)) {
  if (journal_dir_) {
    std::filesystem::create_directories(*journal_dir_);
    recover();
    ratings_journal_ = std::make_unique<JournalFile>(*journal_dir_ / kRatingsFile);
  }
}

SessionStore::~SessionStore() = default;

void SessionStore::recover() {
  std::vector<std::pair<std::uint64_t, std::filesystem::path>> found;
  for (const auto& entry : std::filesystem::directory_iterator(*journal_dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
    const auto stem = entry.path().stem().string();
    if (const auto n = session_number(stem)) found.emplace_back(*n, entry.path());
  }
  std::sort(found.begin(), found.end());
  for (const auto& [n, path] : found) {
    auto session = replay_session_journal(path);
    const auto id = session.session_id();
    auto e = std::unique_ptr<Entry>(new Entry{{}, std::move(session),
                                              std::make_unique<JournalFile>(path)});
    entries_.emplace(id, std::move(e));
    order_.push_back(id);
    next_id_ = std::max(next_id_, n + 1);
  }

  const auto ratings_path = *journal_dir_ / kRatingsFile;
  if (std::filesystem::exists(ratings_path)) {
    const auto lines = journal_lines(ratings_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      try {
        const auto j = json::parse(lines[i]);
        ratings_.push_back(make_rating(j.at("item_id").get<std::string>(),
                                       j.at("rater_id").get<std::string>(),
                                       j.at("score").get<int>()));
      } catch (const std::exception& e) {
        throw DataError(ratings_path.string(), i + 1, e.what());
      }
    }
  }
}

SessionStore::Entry& SessionStore::find(const std::string& session_id) const {
  std::shared_lock lock(map_mutex_);
  const auto it = entries_.find(session_id);
  if (it == entries_.end()) throw NotFound("unknown session '" + session_id + "'");
  return *it->second;  // entries are never erased, so the reference stays valid
}

AnnotationSession SessionStore::create(const TokenSeq& source,
                                       std::optional<std::string> item_id) {
  if (item_id && item_id->empty()) throw ProtocolError("item_id must be non-empty");
  std::unique_lock lock(map_mutex_);
  const auto id = std::string(kSessionPrefix) + std::to_string(next_id_);
  AnnotationSession session(id, item_id.value_or(id), source);
  std::unique_ptr<JournalFile> journal;
  if (journal_dir_) {
    journal = std::make_unique<JournalFile>(*journal_dir_ / (id + ".jsonl"));
    journal->append(create_line(session));
  }
  ++next_id_;
  entries_.emplace(id, std::unique_ptr<Entry>(new Entry{{}, session, std::move(journal)}));
  order_.push_back(id);
  return session;
}

template <typename Fn>
auto SessionStore::mutate(const std::string& session_id,
                          std::optional<std::size_t> expected,
                          const std::string& journal_line, Fn&& fn) {
  auto& entry = find(session_id);
  std::lock_guard lock(entry.mutex);
  if (expected && *expected != entry.session.events().size()) {
    throw StateError("stale request: session " + session_id + " has " +
                     std::to_string(entry.session.events().size()) +
                     " events, client expected " + std::to_string(*expected));
  }
  auto next = entry.session;
  auto result = fn(next);
  if (entry.journal) entry.journal->append(journal_line);
  entry.session = std::move(next);
  return result;
}

std::string SessionStore::read(const std::string& session_id,
                               std::optional<std::size_t> expected_events) {
  return mutate(session_id, expected_events, op_line("read"),
                [](AnnotationSession& s) { return std::string(s.read()); });
}

TokenSeq SessionStore::write(const std::string& session_id, std::string token,
                             std::optional<std::size_t> expected_events) {
  // Checked here too: the journal line cannot be encoded for invalid UTF-8.
  if (!is_valid_token(token)) {
    throw ProtocolError("illegal target token: tokens must be non-empty UTF-8 "
                        "without whitespace");
  }
  const auto line = write_line(token);
  return mutate(session_id, expected_events, line,
                [&](AnnotationSession& s) { return s.write(std::move(token)); });
}

StreamLog SessionStore::finish(const std::string& session_id,
                               std::optional<std::size_t> expected_events) {
  return mutate(session_id, expected_events, op_line("finish"),
                [](AnnotationSession& s) { return s.finish(); });
}

AnnotationSession SessionStore::get(const std::string& session_id) const {
  auto& entry = find(session_id);
  std::lock_guard lock(entry.mutex);
  return entry.session;
}

std::vector<AnnotationSession> SessionStore::sessions() const {
  std::vector<std::string> ids;
  {
    std::shared_lock lock(map_mutex_);
    ids = order_;
  }
  std::vector<AnnotationSession> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(get(id));
  return out;
}

RatingRecord SessionStore::submit_rating(std::string item_id, std::string rater_id,
                                         int score) {
  auto record = make_rating(std::move(item_id), std::move(rater_id), score);
  std::lock_guard lock(ratings_mutex_);
  if (ratings_journal_) ratings_journal_->append(rating_line(record));
  ratings_.push_back(record);
  return record;
}

std::vector<RatingRecord> SessionStore::ratings() const {
  std::lock_guard lock(ratings_mutex_);
  return ratings_;
}

AnnotationExport SessionStore::export_all() const {
  const auto all = sessions();
  return export_annotations(all);
}

}  // namespace simulmt

#include "simulmt/core.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

namespace simulmt {

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Strict UTF-8 check: rejects overlongs, surrogates and code points past
// U+10FFFF.
bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

void require_token(const std::string& token) {
  if (!is_valid_token(token)) {
    throw InvalidArgument("invalid token '" + token +
                          "': tokens must be non-empty UTF-8 without "
                          "whitespace");
  }
}

std::string describe(const Action& a) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Read>) return "Read";
        if constexpr (std::is_same_v<T, Write>) return "Write";
        return "Snapshot";
      },
      a);
}

}  // namespace

bool is_valid_token(std::string_view token) {
  if (token.empty()) return false;
  if (std::any_of(token.begin(), token.end(), [](char c) {
        return is_ascii_space(static_cast<unsigned char>(c));
      })) {
    return false;
  }
  return is_valid_utf8(token);
}

TokenSeq::TokenSeq(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (const auto& t : tokens_) require_token(t);
}

TokenSeq::TokenSeq(std::initializer_list<std::string> tokens)
    : TokenSeq(std::vector<std::string>(tokens)) {}

TokenSeq TokenSeq::from_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_ascii_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_ascii_space(line[i])) ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return TokenSeq(std::move(out));
}

TokenSeq TokenSeq::prefix(std::size_t n) const {
  TokenSeq out;
  const auto len = std::min(n, tokens_.size());
  out.tokens_.assign(tokens_.begin(), tokens_.begin() + len);
  return out;
}

void TokenSeq::push_back(std::string token) {
  require_token(token);
  tokens_.push_back(std::move(token));
}

std::string TokenSeq::join() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out += ' ';
    out += tokens_[i];
  }
  return out;
}

std::string_view to_string(LogMode mode) {
  return mode == LogMode::kStreaming ? "streaming" : "retranslation";
}

LogMode log_mode_from_string(std::string_view name) {
  if (name == "streaming") return LogMode::kStreaming;
  if (name == "retranslation") return LogMode::kRetranslation;
  throw ParseError("unknown log mode '" + std::string(name) + "'");
}

std::vector<Violation> check_actions(LogMode mode,
                                     const std::vector<Action>& actions) {
  std::vector<Violation> out;
  if (actions.empty()) {
    out.push_back({std::nullopt, "log has no actions; the first action must "
                                 "be a Read"});
    return out;
  }
  if (!std::holds_alternative<Read>(actions.front())) {
    out.push_back({0, "action 0 is a " + describe(actions.front()) +
                          "; the first action must be a Read"});
  }
  bool snapshot_since_read = false;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto& a = actions[i];
    if (const auto* r = std::get_if<Read>(&a)) {
      snapshot_since_read = false;
      if (!is_valid_token(r->token)) {
        out.push_back({i, "action " + std::to_string(i) +
                              " has an invalid Read token"});
      }
    } else if (const auto* w = std::get_if<Write>(&a)) {
      if (mode == LogMode::kRetranslation) {
        out.push_back({i, "action " + std::to_string(i) +
                              " is a Write; retranslation logs allow only "
                              "Read and Snapshot"});
      }
      if (!is_valid_token(w->token)) {
        out.push_back({i, "action " + std::to_string(i) +
                              " has an invalid Write token"});
      }
    } else {
      if (mode == LogMode::kStreaming) {
        out.push_back({i, "action " + std::to_string(i) +
                              " is a Snapshot; streaming logs allow only "
                              "Read and Write"});
      } else if (snapshot_since_read) {
        out.push_back({i, "action " + std::to_string(i) +
                              " is a second Snapshot after the same Read"});
      }
      snapshot_since_read = true;
    }
  }
  return out;
}

StreamLog::StreamLog(std::string id, LogMode mode, std::vector<Action> actions)
    : id_(std::move(id)), mode_(mode), actions_(std::move(actions)) {
  const auto violations = check_actions(mode_, actions_);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw InvalidLog("log '" + id_ + "': " + v.message, v.index);
  }
}

std::size_t StreamLog::read_count() const {
  return static_cast<std::size_t>(std::count_if(
      actions_.begin(), actions_.end(),
      [](const Action& a) { return std::holds_alternative<Read>(a); }));
}

std::size_t StreamLog::write_count() const {
  return static_cast<std::size_t>(std::count_if(
      actions_.begin(), actions_.end(),
      [](const Action& a) { return std::holds_alternative<Write>(a); }));
}

TokenSeq StreamLog::source_stream() const {
  std::vector<std::string> out;
  for (const auto& a : actions_) {
    if (const auto* r = std::get_if<Read>(&a)) out.push_back(r->token);
  }
  return TokenSeq(std::move(out));
}

TokenSeq StreamLog::target_stream() const {
  std::vector<std::string> out;
  for (const auto& a : actions_) {
    if (const auto* w = std::get_if<Write>(&a)) out.push_back(w->token);
  }
  return TokenSeq(std::move(out));
}

StreamLog parse_stream_log(std::string_view line) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("record is not a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "id" && key != "mode" && key != "actions") {
      throw ParseError("unexpected key '" + key + "'");
    }
  }
  if (!doc.contains("id") || !doc["id"].is_string()) {
    throw ParseError("missing string field 'id'");
  }
  if (!doc.contains("mode") || !doc["mode"].is_string()) {
    throw ParseError("missing string field 'mode'");
  }
  if (!doc.contains("actions") || !doc["actions"].is_array()) {
    throw ParseError("missing array field 'actions'");
  }
  const auto mode = log_mode_from_string(doc["mode"].get<std::string>());

  std::vector<Action> actions;
  const auto& arr = doc["actions"];
  actions.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& item = arr[i];
    const auto where = "action " + std::to_string(i);
    if (!item.is_array() || item.size() != 2 || !item[0].is_string()) {
      throw ParseError(where + " is not a [tag, payload] pair");
    }
    const auto tag = item[0].get<std::string>();
    if (tag == "R" || tag == "W") {
      if (!item[1].is_string()) throw ParseError(where + " payload is not a string");
      auto tok = item[1].get<std::string>();
      if (tag == "R") {
        actions.emplace_back(Read{std::move(tok)});
      } else {
        actions.emplace_back(Write{std::move(tok)});
      }
    } else if (tag == "H") {
      if (!item[1].is_array()) throw ParseError(where + " payload is not a token list");
      std::vector<std::string> toks;
      for (const auto& t : item[1]) {
        if (!t.is_string()) throw ParseError(where + " has a non-string token");
        toks.push_back(t.get<std::string>());
      }
      try {
        actions.emplace_back(Snapshot{TokenSeq(std::move(toks))});
      } catch (const InvalidArgument& e) {
        throw InvalidLog(where + ": " + e.what(), i);
      }
    } else {
      throw ParseError(where + " has unknown tag '" + tag + "'");
    }
  }
  return StreamLog(doc["id"].get<std::string>(), mode, std::move(actions));
}

std::string serialize_stream_log(const StreamLog& log) {
  using nlohmann::ordered_json;
  ordered_json actions = ordered_json::array();
  for (const auto& a : log.actions()) {
    if (const auto* r = std::get_if<Read>(&a)) {
      actions.push_back({"R", r->token});
    } else if (const auto* w = std::get_if<Write>(&a)) {
      actions.push_back({"W", w->token});
    } else {
      const auto& s = std::get<Snapshot>(a);
      actions.push_back(
          ordered_json::array({"H", ordered_json(s.hypothesis.tokens())}));
    }
  }
  ordered_json doc;
  doc["id"] = log.id();
  doc["mode"] = to_string(log.mode());
  doc["actions"] = std::move(actions);
  return doc.dump(-1, ' ', false, ordered_json::error_handler_t::strict);
}

}  // namespace simulmt

#include "simulmt/server.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

namespace simulmt {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, ordered_json::error_handler_t::replace),
                  "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, ordered_json{{"error", message}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("request body is not valid JSON: ") + e.what());
  }
  if (!body.is_object()) throw ProtocolError("request body must be a JSON object");
  return body;
}

std::optional<std::size_t> expected_events(const json& body) {
  if (!body.contains("expected_events")) return std::nullopt;
  const auto& v = body["expected_events"];
  if (!v.is_number_unsigned()) {
    throw ProtocolError("expected_events must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw ProtocolError(std::string("missing string field '") + key + "'");
  }
  return body[key].get<std::string>();
}

ordered_json events_json(const std::vector<Action>& events) {
  ordered_json out = ordered_json::array();
  for (const auto& a : events) {
    if (const auto* r = std::get_if<Read>(&a)) {
      out.push_back({"R", r->token});
    } else if (const auto* w = std::get_if<Write>(&a)) {
      out.push_back({"W", w->token});
    }
  }
  return out;
}

ordered_json state_json(const AnnotationSession& s) {
  ordered_json j;
  j["session_id"] = s.session_id();
  j["item_id"] = s.item_id();
  j["state"] = to_string(s.state());
  j["reads_done"] = s.reads_done();
  j["finishable"] = s.finishable();
  j["exposed"] = s.exposed().tokens();
  j["target_stream"] = s.written().tokens();
  j["events"] = events_json(s.events());
  return j;
}

// Maps library errors onto status codes; everything runs through here.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const NotFound& e) {
      send_error(res, 404, e.what());
    } catch (const StateError& e) {
      send_error(res, 409, e.what());
    } catch (const ProtocolError& e) {
      send_error(res, 400, e.what());
    } catch (const InvalidArgument& e) {
      send_error(res, 400, e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

AnnotationServer::AnnotationServer(SessionStore& store, ServerOptions options)
    : store_(store), options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind_to_any_port(const std::string& host) {
  return server_->bind_to_any_port(host);
}

bool AnnotationServer::bind(const std::string& host, int port) {
  return server_->bind_to_port(host, port);
}

bool AnnotationServer::listen_after_bind() { return server_->listen_after_bind(); }

void AnnotationServer::stop() {
  if (server_->is_running()) server_->stop();
}

void AnnotationServer::wait_until_ready() const { server_->wait_until_ready(); }

void AnnotationServer::install_routes() {
  auto& srv = *server_;

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.contains("source_tokens") || !body["source_tokens"].is_array()) {
      throw ProtocolError("missing array field 'source_tokens'");
    }
    std::vector<std::string> tokens;
    for (const auto& t : body["source_tokens"]) {
      if (!t.is_string()) throw ProtocolError("source_tokens must be strings");
      tokens.push_back(t.get<std::string>());
    }
    std::optional<std::string> item_id;
    if (body.contains("item_id")) item_id = required_string(body, "item_id");
    TokenSeq source;
    try {
      source = TokenSeq(std::move(tokens));
    } catch (const InvalidArgument& e) {
      throw ProtocolError(e.what());
    }
    const auto s = store_.create(source, item_id);
    ordered_json j;
    j["session_id"] = s.session_id();
    j["item_id"] = s.item_id();
    j["exposed"] = s.exposed().tokens();
    send_json(res, 200, j);
  }));

  srv.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
    ordered_json list = ordered_json::array();
    for (const auto& s : store_.sessions()) {
      list.push_back({{"session_id", s.session_id()},
                      {"item_id", s.item_id()},
                      {"state", to_string(s.state())}});
    }
    send_json(res, 200, ordered_json{{"sessions", list}});
  }));

  srv.Get("/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, state_json(store_.get(req.path_params.at("id"))));
  }));

  srv.Post("/sessions/:id/read", guarded([this](const httplib::Request& req,
                                                httplib::Response& res) {
    const auto body = parse_body(req);
    const auto& id = req.path_params.at("id");
    const auto token = store_.read(id, expected_events(body));
    const auto s = store_.get(id);
    ordered_json j;
    j["exposed_token"] = token;
    j["reads_done"] = s.reads_done();
    j["finishable"] = s.finishable();
    send_json(res, 200, j);
  }));

  srv.Post("/sessions/:id/write", guarded([this](const httplib::Request& req,
                                                 httplib::Response& res) {
    const auto body = parse_body(req);
    const auto stream = store_.write(req.path_params.at("id"),
                                     required_string(body, "token"),
                                     expected_events(body));
    send_json(res, 200, ordered_json{{"target_stream", stream.tokens()}});
  }));

  srv.Post("/sessions/:id/finish", guarded([this](const httplib::Request& req,
                                                  httplib::Response& res) {
    const auto body = parse_body(req);
    const auto log = store_.finish(req.path_params.at("id"), expected_events(body));
    send_json(res, 200, ordered_json::parse(serialize_stream_log(log)));
  }));

  srv.Post("/ratings", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.contains("score") || !body["score"].is_number_integer()) {
      throw ProtocolError("missing integer field 'score'");
    }
    const auto r = store_.submit_rating(required_string(body, "item_id"),
                                        required_string(body, "rater_id"),
                                        body["score"].get<int>());
    send_json(res, 200, ordered_json{{"item_id", r.item_id},
                                     {"rater_id", r.rater_id},
                                     {"score", r.score}});
  }));

  srv.Get("/ratings/ap", guarded([this](const httplib::Request& req, httplib::Response& res) {
    int threshold = 3;
    if (req.has_param("threshold")) {
      const auto raw = req.get_param_value("threshold");
      try {
        std::size_t used = 0;
        threshold = std::stoi(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
      } catch (const std::logic_error&) {
        throw ProtocolError("threshold must be an integer");
      }
    }
    const auto records = store_.ratings();
    if (records.empty()) throw StateError("no ratings; acceptability is undefined");
    const auto report = ap_rate(records, threshold);
    ordered_json j;
    j["threshold"] = report.threshold;
    j["items"] = report.items;
    j["ap"] = report.ap;
    j["per_rater"] = report.per_rater;
    send_json(res, 200, j);
  }));

  srv.Get("/export", guarded([this](const httplib::Request&, httplib::Response& res) {
    const auto exported = store_.export_all();
    ordered_json files;
    files["references.txt"] = exported.references;
    files["logs.jsonl"] = exported.logs;
    send_json(res, 200, ordered_json{{"files", files}});
  }));

  if (options_.static_dir) srv.set_mount_point("/", options_.static_dir->string());
}

}  // namespace simulmt

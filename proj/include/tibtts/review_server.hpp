#pragma once

// HTTP front for ReviewStore. Routes:
//   GET  /queue?offset&limit   -> {total, offset, limit, items}
//   GET  /records/{id}         -> CorpusRecord
//   GET  /audio/{id}           -> audio/wav bytes
//   POST /decisions            -> {record, noop}
// Errors are {category, message, id?}. Static UI files are mounted at /.

#include <httplib.h>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "tibtts/error.hpp"
#include "tibtts/json_util.hpp"
#include "tibtts/review.hpp"

namespace tibtts::review {

inline int http_status_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::UnknownId: return 404;
    case ErrorCategory::NotReviewable: return 409;
    case ErrorCategory::InvalidEdit:
    case ErrorCategory::BadRequest: return 400;
    default: return 500;
  }
}

inline Json error_body(const Error& e, const std::optional<std::string>& id = std::nullopt) {
  Json j{{"category", std::string(category_name(e.category()))}, {"message", e.detail()}};
  if (id) j["id"] = *id;
  return j;
}

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path ui_dir;  // empty: no static files
  std::size_t default_limit = 50;
};

namespace detail {

inline void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline std::size_t parse_count(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  std::size_t used = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || v.front() == '-') {
    throw Error(ErrorCategory::BadRequest, std::string("query parameter '") + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(n);
}

template <class F>
void guarded(httplib::Response& res, const std::optional<std::string>& id, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    send_json(res, http_status_for(e.category()), error_body(e, id));
  } catch (const std::exception& e) {
    send_json(res, 500, Json{{"category", "Internal"}, {"message", e.what()}});
  }
}

}  // namespace detail

inline std::unique_ptr<httplib::Server> make_server(ReviewStore& store, const ServerOptions& opts = {}) {
  auto srv = std::make_unique<httplib::Server>();
  using detail::guarded;
  using detail::send_json;

  srv->Get("/queue", [&store, opts](const httplib::Request& req, httplib::Response& res) {
    guarded(res, std::nullopt, [&] {
      const auto offset = detail::parse_count(req, "offset", 0);
      const auto limit = detail::parse_count(req, "limit", opts.default_limit);
      send_json(res, 200, store.queue(offset, limit).to_json());
    });
  });

  srv->Get(R"(/records/(.+))", [&store](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    guarded(res, id, [&] { send_json(res, 200, store.record(id).to_json()); });
  });

  srv->Get(R"(/audio/(.+))", [&store](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    guarded(res, id, [&] {
      res.status = 200;
      res.set_content(store.audio(id), "audio/wav");
    });
  });

  srv->Post("/decisions", [&store](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> id;  // read by guarded() after it is filled in
    guarded(res, id, [&] {
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const Json::parse_error& e) {
        throw Error(ErrorCategory::BadRequest, std::string("body is not JSON: ") + e.what());
      }
      if (body.is_object() && body.contains("record_id") && body["record_id"].is_string()) {
        id = body["record_id"].get<std::string>();
      }
      const auto result = store.decide(manifest::ReviewDecision::from_json(body));
      send_json(res, 200, Json{{"record", result.record.to_json()}, {"noop", result.noop}});
    });
  });

  if (!opts.ui_dir.empty()) {
    if (!srv->set_mount_point("/", opts.ui_dir.string())) {
      throw Error(ErrorCategory::InvalidConfig, "ui directory not found: " + opts.ui_dir.string());
    }
  }
  return srv;
}

}  // namespace tibtts::review

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "exfake/decision.hpp"
#include "exfake/orchestrator.hpp"

namespace exfake {

// Closed set of machine-readable error codes.
enum class ApiErrorCode {
  kMissingField,
  kInvalidField,
  kInvalidJson,
  kNotFound,
  kFeedsUnavailable,
  kInternal,
};

inline std::string_view api_error_code_name(ApiErrorCode c) {
  switch (c) {
    case ApiErrorCode::kMissingField: return "missing_field";
    case ApiErrorCode::kInvalidField: return "invalid_field";
    case ApiErrorCode::kInvalidJson: return "invalid_json";
    case ApiErrorCode::kNotFound: return "not_found";
    case ApiErrorCode::kFeedsUnavailable: return "feeds_unavailable";
    case ApiErrorCode::kInternal: return "internal";
  }
  return "internal";
}

struct ApiError {
  ApiErrorCode code = ApiErrorCode::kInternal;
  std::string message;
  nlohmann::ordered_json detail;  // null when absent

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = {{"code", api_error_code_name(code)},
                                {"message", message}};
    if (!detail.is_null()) j["detail"] = detail;
    return j;
  }
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

struct ServiceConfig {
  bool allow_degraded = true;    // degraded runs still return the decision
  bool unknown_user_404 = false; // otherwise unknown handles score 50, N = 0
  std::optional<std::filesystem::path> decision_log;  // one decision per line
};

// Request handling for the /v1 API, independent of the transport so it can
// be exercised directly. bind() attaches it to an httplib server.
class Service {
 public:
  Service(std::shared_ptr<Orchestrator> orchestrator, ServiceConfig cfg = {})
      : orchestrator_(std::move(orchestrator)), cfg_(std::move(cfg)) {
    if (!orchestrator_) throw Error("service needs an orchestrator");
    if (cfg_.decision_log) {
      load_decisions(*cfg_.decision_log);
      orchestrator_->skip_ids(decisions_.size());
    }
  }

  ApiResponse analyze(const std::string& body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      return error(400, {ApiErrorCode::kInvalidJson, e.what(), nullptr});
    }
    if (!j.is_object()) {
      return error(400, {ApiErrorCode::kInvalidJson, "body must be a JSON object", nullptr});
    }
    Post post;
    for (const char* key : {"text", "author", "published_at"}) {
      const auto it = j.find(key);
      if (it == j.end() || it->is_null() ||
          (it->is_string() && it->get<std::string>().empty())) {
        return error(400, {ApiErrorCode::kMissingField,
                           std::string("missing field '") + key + "'",
                           {{"field", key}}});
      }
      if (!it->is_string()) {
        return error(400, {ApiErrorCode::kInvalidField,
                           std::string("field '") + key + "' must be a string",
                           {{"field", key}}});
      }
    }
    if (j.contains("id") && !j.at("id").is_null()) {
      if (!j.at("id").is_string()) {
        return error(400, {ApiErrorCode::kInvalidField, "field 'id' must be a string",
                           {{"field", "id"}}});
      }
      post.id = j.at("id").get<std::string>();
    }
    post.text = j.at("text").get<std::string>();
    post.author = j.at("author").get<std::string>();
    try {
      post.published_at = parse_timestamp(j.at("published_at").get<std::string>());
    } catch (const ValidationError& e) {
      return error(400, {ApiErrorCode::kInvalidField, e.what(),
                         {{"field", "published_at"}}});
    }

    const Feeds& feeds = orchestrator_->feeds();
    if (!cfg_.allow_degraded && (!feeds.articles || !feeds.entity_posts)) {
      return error(503, {ApiErrorCode::kFeedsUnavailable,
                         "evidence feeds unavailable", feed_status()});
    }

    Decision decision;
    try {
      decision = orchestrator_->analyze(std::move(post));
    } catch (const Error& e) {
      return error(400, {ApiErrorCode::kInvalidField, e.what(), nullptr});
    } catch (const std::exception& e) {
      return error(500, {ApiErrorCode::kInternal, e.what(), nullptr});
    }
    std::string bytes = serialize_decision(decision);
    store_decision(decision.id, bytes);
    if (decision.degraded && !cfg_.allow_degraded) {
      return error(503, {ApiErrorCode::kFeedsUnavailable,
                         "evidence feeds unavailable",
                         {{"decision_id", decision.id}}});
    }
    return {decision.degraded ? 503 : 200, std::move(bytes)};
  }

  ApiResponse decision(const std::string& id) const {
    std::shared_lock lock(decisions_mu_);
    const auto it = decisions_.find(id);
    if (it == decisions_.end()) {
      return error(404, {ApiErrorCode::kNotFound, "unknown decision '" + id + "'",
                         nullptr});
    }
    return {200, it->second};
  }

  ApiResponse user_score(const std::string& handle) const {
    const SourceSnapshot s = orchestrator_->store().snapshot(handle);
    if (s.count == 0 && cfg_.unknown_user_404) {
      return error(404, {ApiErrorCode::kNotFound, "unknown user '" + handle + "'",
                         nullptr});
    }
    nlohmann::ordered_json j = {{"handle", handle},
                                {"score", s.score()},
                                {"N", s.count},
                                {"M", detail::optional_number(s.mean)}};
    return {200, j.dump()};
  }

  ApiResponse health() const {
    nlohmann::ordered_json j = {
        {"status", "ok"},
        {"feeds", feed_status()},
        {"registry_entities", orchestrator_->registry().size()},
        {"users", orchestrator_->store().user_count()},
        {"decisions", decision_count()}};
    return {200, j.dump()};
  }

  std::size_t decision_count() const {
    std::shared_lock lock(decisions_mu_);
    return decisions_.size();
  }

  void bind(httplib::Server& server) {
    auto send = [](httplib::Response& res, const ApiResponse& r) {
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    server.Post("/v1/analyze", [this, send](const httplib::Request& req,
                                            httplib::Response& res) {
      send(res, analyze(req.body));
    });
    server.Get(R"(/v1/decisions/([^/]+))", [this, send](const httplib::Request& req,
                                                        httplib::Response& res) {
      send(res, decision(req.matches[1]));
    });
    server.Get(R"(/v1/users/([^/]+)/score)", [this, send](const httplib::Request& req,
                                                          httplib::Response& res) {
      send(res, user_score(req.matches[1]));
    });
    server.Get("/v1/health", [this, send](const httplib::Request&,
                                          httplib::Response& res) {
      send(res, health());
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      const ApiError e{res.status == 404 ? ApiErrorCode::kNotFound
                                         : ApiErrorCode::kInternal,
                       "no route for " + req.method + " " + req.path, nullptr};
      res.set_content(e.to_json().dump(), "application/json");
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                    std::exception_ptr ep) {
      std::string what = "unhandled exception";
      try {
        if (ep) std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      res.status = 500;
      res.set_content(ApiError{ApiErrorCode::kInternal, what, nullptr}.to_json().dump(),
                      "application/json");
    });
  }

 private:
  static ApiResponse error(int status, const ApiError& e) {
    return {status, e.to_json().dump()};
  }

  nlohmann::ordered_json feed_status() const {
    const Feeds& f = orchestrator_->feeds();
    auto one = [](const auto& src) {
      nlohmann::ordered_json j = {{"available", src != nullptr}};
      j["items"] = src ? src->size() : 0;
      return j;
    };
    return {{"articles", one(f.articles)}, {"entity_posts", one(f.entity_posts)}};
  }

  void store_decision(const std::string& id, const std::string& bytes) {
    std::unique_lock lock(decisions_mu_);
    decisions_[id] = bytes;
    if (cfg_.decision_log) {
      std::ofstream out(*cfg_.decision_log, std::ios::app);
      out << bytes << '\n';
    }
  }

  void load_decisions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("id")) continue;
      decisions_[j.at("id").get<std::string>()] = line;
    }
  }

  std::shared_ptr<Orchestrator> orchestrator_;
  ServiceConfig cfg_;
  mutable std::shared_mutex decisions_mu_;
  std::map<std::string, std::string> decisions_;
};

}  // namespace exfake

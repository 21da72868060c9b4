#include "exfake/service.hpp"

#include <set>
#include <string>
#include <thread>

#include "gtest/gtest.h"
#include "test_support.hpp"

namespace exfake {
namespace {

using nlohmann::json;
using test::ScratchDir;

const Timestamp kT0 = parse_timestamp("2016-09-27T01:00:00Z");
const std::string kClaim = "Trump called women dogs at the presidential debate";

std::shared_ptr<Orchestrator> make_orchestrator(bool with_feeds = true) {
  Feeds feeds;
  if (with_feeds) {
    feeds.articles = std::make_shared<ArticleFeed>(std::vector<FactCheckArticle>{
        {"a1", kClaim, "PolitiFact", kT0 - std::chrono::hours(1),
         "https://factcheck.example/a1"}});
    feeds.entity_posts = std::make_shared<EntityPostFeed>();
  }
  auto registry = std::make_shared<const EntityRegistry>(std::vector<RegistryEntry>{
      {"Donald Trump", {"Trump"}, "PER", "@realDonaldTrump"}});
  OrchestratorConfig cfg;
  cfg.model = {{1.0, 1.0, 1.0}, -1.5};
  cfg.step_horizon = std::chrono::hours(1);
  return std::make_shared<Orchestrator>(feeds, registry, Scorers::baseline(), nullptr, cfg);
}

std::string body(const std::string& text, const std::string& author,
                 const std::string& time = "2016-09-27T01:00:00Z") {
  return json{{"text", text}, {"author", author}, {"published_at", time}}.dump();
}

TEST(ServiceAnalyze, ValidBody) {
  Service svc(make_orchestrator());
  const auto r = svc.analyze(body(kClaim, "newcomer"));
  ASSERT_EQ(r.status, 200) << r.body;
  const auto j = json::parse(r.body);
  EXPECT_EQ(j["schema"], "exfake-decision");
  EXPECT_EQ(j["provisional"].size(), 3u);
  EXPECT_EQ(j["final"], j["provisional"][2]);
  EXPECT_EQ(j["source"]["score"], 50.0);
  EXPECT_EQ(j["source"]["N"], 0);
  for (const auto& s : j["steps"]) EXPECT_EQ(s["scores"]["source"], 50.0);
  EXPECT_EQ(j["label"], label_name(map_label(j["final"].get<double>()).label));
  ASSERT_EQ(j["explanation"]["items"].size(), 1u);
  EXPECT_FALSE(j["explanation"]["items"][0]["highlights"].empty());
}

TEST(ServiceAnalyze, BadBodies) {
  Service svc(make_orchestrator());
  auto code_of = [](const ApiResponse& r) { return json::parse(r.body)["code"].get<std::string>(); };

  auto r = svc.analyze(json{{"author", "x"}, {"published_at", "2016-09-27T01:00:00Z"}}.dump());
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code_of(r), "missing_field");
  EXPECT_EQ(json::parse(r.body)["detail"]["field"], "text");

  r = svc.analyze(body("", "x"));
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code_of(r), "missing_field");

  r = svc.analyze("{nope");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code_of(r), "invalid_json");

  r = svc.analyze("[1,2]");
  EXPECT_EQ(code_of(r), "invalid_json");

  r = svc.analyze(json{{"text", 5}, {"author", "x"}, {"published_at", "2016-09-27T01:00:00Z"}}.dump());
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code_of(r), "invalid_field");

  r = svc.analyze(body("hello", "x", "last tuesday"));
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(code_of(r), "invalid_field");
  EXPECT_EQ(svc.decision_count(), 0u);
}

TEST(ServiceDecisions, StoredBytesAreIdentical) {
  Service svc(make_orchestrator());
  const auto r = svc.analyze(body(kClaim, "a"));
  const auto id = json::parse(r.body)["id"].get<std::string>();
  const auto g = svc.decision(id);
  EXPECT_EQ(g.status, 200);
  EXPECT_EQ(g.body, r.body);
  const auto missing = svc.decision("d-999999");
  EXPECT_EQ(missing.status, 404);
  EXPECT_EQ(json::parse(missing.body)["code"], "not_found");
}

TEST(ServiceUsers, UnknownAndKnownHandles) {
  Service svc(make_orchestrator());
  auto r = svc.user_score("ghost");
  EXPECT_EQ(r.status, 200);
  auto j = json::parse(r.body);
  EXPECT_EQ(j["score"], 50.0);
  EXPECT_EQ(j["N"], 0);
  EXPECT_TRUE(j["M"].is_null());

  const auto a = json::parse(svc.analyze(body(kClaim, "alice")).body);
  j = json::parse(svc.user_score("alice").body);
  EXPECT_EQ(j["N"], 1);
  EXPECT_EQ(j["M"], a["final"]);
  // One user: D = M, so the Bayesian average is M itself.
  EXPECT_NEAR(j["score"].get<double>(), a["final"].get<double>(), 1e-12);

  ServiceConfig strict;
  strict.unknown_user_404 = true;
  Service svc404(make_orchestrator(), strict);
  r = svc404.user_score("ghost");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(json::parse(r.body)["code"], "not_found");
}

TEST(ServiceHealth, ReportsFeeds) {
  Service svc(make_orchestrator());
  const auto r = svc.health();
  EXPECT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["feeds"]["articles"]["available"], true);
  EXPECT_EQ(j["feeds"]["articles"]["items"], 1);
}

TEST(ServiceDegraded, FlaggedDecisionOrError) {
  Service lenient(make_orchestrator(false));
  auto r = lenient.analyze(body(kClaim, "x"));
  EXPECT_EQ(r.status, 503);
  auto j = json::parse(r.body);
  EXPECT_EQ(j["degraded"], true);
  EXPECT_EQ(j["steps"][0]["scores"]["fact"], 50.0);
  EXPECT_EQ(lenient.decision(j["id"]).body, r.body);

  ServiceConfig deny;
  deny.allow_degraded = false;
  Service strict(make_orchestrator(false), deny);
  r = strict.analyze(body(kClaim, "x"));
  EXPECT_EQ(r.status, 503);
  j = json::parse(r.body);
  EXPECT_EQ(j["code"], "feeds_unavailable");
  EXPECT_EQ(j["detail"]["articles"]["available"], false);
}

TEST(ServicePersistence, DecisionLogReloads) {
  ScratchDir dir("decisions");
  ServiceConfig cfg;
  cfg.decision_log = dir / "decisions.jsonl";
  std::string first;
  {
    Service svc(make_orchestrator(), cfg);
    first = svc.analyze(body(kClaim, "a")).body;
  }
  Service again(make_orchestrator(), cfg);
  EXPECT_EQ(again.decision("d-000001").body, first);
  const auto next = json::parse(again.analyze(body(kClaim, "b")).body);
  EXPECT_EQ(next["id"], "d-000002");
}

TEST(ApiError, ClosedCodeSet) {
  std::set<std::string_view> names;
  for (auto c : {ApiErrorCode::kMissingField, ApiErrorCode::kInvalidField,
                 ApiErrorCode::kInvalidJson, ApiErrorCode::kNotFound,
                 ApiErrorCode::kFeedsUnavailable, ApiErrorCode::kInternal}) {
    names.insert(api_error_code_name(c));
  }
  EXPECT_EQ(names, (std::set<std::string_view>{"missing_field", "invalid_field",
                                               "invalid_json", "not_found",
                                               "feeds_unavailable", "internal"}));
}

TEST(ServiceHttp, EndToEndOverLoopback) {
  Service svc(make_orchestrator());
  httplib::Server server;
  svc.bind(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/v1/analyze", body(kClaim, "http-user"), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto id = json::parse(res->body)["id"].get<std::string>();

  auto got = client.Get("/v1/decisions/" + id);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->status, 200);
  EXPECT_EQ(got->body, res->body);

  auto score = client.Get("/v1/users/http-user/score");
  ASSERT_TRUE(score);
  EXPECT_EQ(json::parse(score->body)["N"], 1);

  auto health = client.Get("/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(json::parse(health->body)["status"], "ok");

  auto bad = client.Post("/v1/analyze", "{}", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto nowhere = client.Get("/v2/anything");
  ASSERT_TRUE(nowhere);
  EXPECT_EQ(nowhere->status, 404);
  EXPECT_EQ(json::parse(nowhere->body)["code"], "not_found");

  server.stop();
  worker.join();
}

}  // namespace
}  // namespace exfake

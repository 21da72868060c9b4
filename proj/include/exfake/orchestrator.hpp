#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <future>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "exfake/decision.hpp"
#include "exfake/exdecision.hpp"
#include "exfake/exentity.hpp"
#include "exfake/exfact.hpp"
#include "exfake/exsource.hpp"
#include "exfake/ingestion.hpp"
#include "exfake/textproc.hpp"

namespace exfake {

// What sleep(t) means between timesteps.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual void sleep(Duration d) = 0;
};

// Replay mode: sleeping only advances a counter.
class VirtualClock : public Clock {
 public:
  void sleep(Duration d) override {
    std::lock_guard lock(mu_);
    elapsed_ += d;
    ++sleeps_;
  }
  Duration elapsed() const {
    std::lock_guard lock(mu_);
    return elapsed_;
  }
  std::size_t sleeps() const {
    std::lock_guard lock(mu_);
    return sleeps_;
  }

 private:
  mutable std::mutex mu_;
  Duration elapsed_{0};
  std::size_t sleeps_ = 0;
};

// Live mode: really waits.
class WallClock : public Clock {
 public:
  void sleep(Duration d) override { std::this_thread::sleep_for(d); }
};

struct OrchestratorConfig {
  int timesteps = kTimesteps;
  Duration step_horizon{0};  // window advance per step
  ScorerConfig scorer;
  FusionModel model;
  ExplainConfig explain;
  bool parallel = true;

  void validate() const {
    if (timesteps != kTimesteps) {
      throw InvalidRange("timesteps must be 3");
    }
    if (step_horizon < Duration{0}) {
      throw InvalidRange("step horizon must be >= 0");
    }
    scorer.validate();
    model.validate();
  }
};

// Runs the three scorers over an advancing window for three timesteps,
// fuses each step, then records the final percentage against the author.
// Requests are processed one at a time.
class Orchestrator {
 public:
  Orchestrator(Feeds feeds, std::shared_ptr<const EntityRegistry> registry,
               Scorers scorers, std::shared_ptr<ScoreStore> store,
               OrchestratorConfig cfg, std::shared_ptr<Clock> clock = nullptr)
      : feeds_(std::move(feeds)),
        registry_(registry ? std::move(registry)
                           : std::make_shared<const EntityRegistry>()),
        scorers_(std::move(scorers)),
        store_(store ? std::move(store) : std::make_shared<ScoreStore>()),
        cfg_(std::move(cfg)),
        clock_(clock ? std::move(clock) : std::make_shared<VirtualClock>()) {
    cfg_.validate();
    if (!scorers_.similarity || !scorers_.nli) {
      throw Error("orchestrator needs a similarity and an NLI backend");
    }
  }

  Decision analyze(Post post) {
    post.validate();
    std::lock_guard pipeline(pipeline_mu_);
    ++sequence_;
    Decision d;
    d.id = make_id("d-", sequence_);
    if (post.id.empty()) post.id = make_id("p-", sequence_);
    d.post = post;

    // Source history is frozen for the whole request.
    d.source = store_->snapshot(post.author);

    const auto entities = extract_entities(post.text, *registry_);
    d.handles = resolve_accounts(entities, *registry_);
    for (const auto& e : entities) {
      const RegistryEntry* entry = registry_->find(e.canonical);
      d.entities.push_back({e, entry ? entry->handle : std::string{}});
    }

    std::vector<FactCheckArticle> last_articles;
    std::vector<EntityPost> last_entity_posts;
    bool fact_failed = false;
    bool entity_failed = false;

    for (int i = 0; i < cfg_.timesteps; ++i) {
      StepResult step;
      step.index = i;
      step.cutoff = post.published_at + (i + 1) * cfg_.step_horizon;

      auto fact_task = [&]() {
        struct Out { ModuleScore score; std::vector<FactCheckArticle> window; bool failed; };
        Out out{{kNoEvidenceScore, ModuleKind::kFact, {}}, {}, false};
        try {
          if (!feeds_.articles) throw FeedUnavailable("article feed unavailable");
          out.window = feeds_.articles->window(step.cutoff);
          out.score = score_against_articles(post, out.window, scorers_, cfg_.scorer);
        } catch (const FeedUnavailable&) {
          out.failed = true;
        }
        return out;
      };
      auto entity_task = [&]() {
        struct Out { ModuleScore score; std::vector<EntityPost> window; bool failed; };
        Out out{{kNoEvidenceScore, ModuleKind::kEntity, {}}, {}, false};
        if (d.handles.empty()) return out;
        try {
          if (!feeds_.entity_posts) {
            throw FeedUnavailable("entity post feed unavailable");
          }
          out.window = filter_by_handles(feeds_.entity_posts->window(step.cutoff),
                                         d.handles);
          out.score =
              score_against_entity_posts(post, out.window, scorers_, cfg_.scorer);
        } catch (const FeedUnavailable&) {
          out.failed = true;
        }
        return out;
      };

      std::optional<decltype(fact_task())> fact;
      std::optional<decltype(entity_task())> entity;
      if (cfg_.parallel) {
        auto f = std::async(std::launch::async, fact_task);
        auto e = std::async(std::launch::async, entity_task);
        step.source = {d.source.score(), ModuleKind::kSource, {}};
        fact.emplace(f.get());
        entity.emplace(e.get());
      } else {
        fact.emplace(fact_task());
        step.source = {d.source.score(), ModuleKind::kSource, {}};
        entity.emplace(entity_task());
      }
      step.fact = std::move(fact->score);
      step.entity = std::move(entity->score);
      step.fact_window = fact->window.size();
      step.entity_window = entity->window.size();
      fact_failed = fact_failed || fact->failed;
      entity_failed = entity_failed || entity->failed;
      last_articles = std::move(fact->window);
      last_entity_posts = std::move(entity->window);

      clock_->sleep(cfg_.step_horizon);

      step.percentage =
          fuse(step.fact.value, step.source.value, step.entity.value, cfg_.model);
      d.provisional[i] = step.percentage;
      d.steps.push_back(std::move(step));
    }

    if (fact_failed) d.degraded_modules.push_back("fact");
    if (entity_failed) d.degraded_modules.push_back("entity");
    d.degraded = !d.degraded_modules.empty();

    d.final_percentage = d.provisional[kTimesteps - 1];
    d.label = map_label(d.final_percentage).label;
    d.explanation = build_explanation(post, d.steps.back(), last_articles,
                                      last_entity_posts);

    store_->record_final(post.author, d.final_percentage, d.id, post.published_at);
    store_->recompute_all();
    return d;
  }

  // Ids already handed out elsewhere, e.g. decisions reloaded from disk.
  void skip_ids(std::size_t n) {
    std::lock_guard pipeline(pipeline_mu_);
    sequence_ += n;
  }

  const Feeds& feeds() const { return feeds_; }
  const EntityRegistry& registry() const { return *registry_; }
  const Scorers& scorers() const { return scorers_; }
  const OrchestratorConfig& config() const { return cfg_; }
  ScoreStore& store() { return *store_; }
  const ScoreStore& store() const { return *store_; }
  std::shared_ptr<ScoreStore> shared_store() const { return store_; }
  Clock& clock() { return *clock_; }

 private:
  static std::string make_id(const char* prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, n);
    return buf;
  }

  Explanation build_explanation(const Post& post, const StepResult& step,
                                const std::vector<FactCheckArticle>& articles,
                                const std::vector<EntityPost>& entity_posts) const {
    std::map<std::string, const FactCheckArticle*> article_by_id;
    for (const auto& a : articles) article_by_id[a.id] = &a;
    std::map<std::string, const EntityPost*> entity_by_id;
    for (const auto& p : entity_posts) entity_by_id[p.id] = &p;

    std::vector<ExplainInput> inputs;
    for (const auto& use : step.fact.evidence) {
      const FactCheckArticle& a = *article_by_id.at(use.item_id);
      inputs.push_back({ModuleKind::kFact, a.id, a.claim_text, a.author,
                        a.published_at, a.url, use.similarity, use.verdict,
                        use.prediction_score});
    }
    for (const auto& use : step.entity.evidence) {
      const EntityPost& p = *entity_by_id.at(use.item_id);
      inputs.push_back({ModuleKind::kEntity, p.id, p.text, p.handle,
                        p.published_at, p.url, use.similarity, use.verdict,
                        use.prediction_score});
    }
    return explain(post.text, inputs, *scorers_.nli, cfg_.explain);
  }

  Feeds feeds_;
  std::shared_ptr<const EntityRegistry> registry_;
  Scorers scorers_;
  std::shared_ptr<ScoreStore> store_;
  OrchestratorConfig cfg_;
  std::shared_ptr<Clock> clock_;
  std::mutex pipeline_mu_;
  std::size_t sequence_ = 0;
};

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

// {"id", "text", "author", "published_at"}; "timestamp" is accepted for
// "published_at".
inline Post post_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("post record must be an object");
  Post p;
  p.id = detail::optional_string(j, "id");
  p.text = detail::required_string(j, "text");
  p.author = detail::required_string(j, "author");
  const char* time_key = j.contains("published_at") ? "published_at" : "timestamp";
  p.published_at = parse_timestamp(detail::required_string(j, time_key));
  p.validate();
  return p;
}

// Reads a request log; malformed lines are reported and skipped.
inline std::vector<Post> read_request_log(std::istream& in,
                                          std::vector<std::string>* diagnostics) {
  std::vector<Post> posts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      posts.push_back(post_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      if (diagnostics) {
        diagnostics->push_back("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  return posts;
}

// Processes the log sequentially in timestamp order (stable).
inline std::vector<Decision> replay(Orchestrator& orchestrator, std::istream& log,
                                    std::vector<std::string>* diagnostics = nullptr) {
  std::vector<Post> posts = read_request_log(log, diagnostics);
  std::stable_sort(posts.begin(), posts.end(), [](const Post& a, const Post& b) {
    return a.published_at < b.published_at;
  });
  std::vector<Decision> out;
  out.reserve(posts.size());
  for (auto& p : posts) out.push_back(orchestrator.analyze(std::move(p)));
  return out;
}

}  // namespace exfake

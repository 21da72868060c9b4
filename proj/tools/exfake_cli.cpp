#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "exfake/evalharness.hpp"
#include "exfake/ingestion.hpp"
#include "exfake/orchestrator.hpp"
#include "exfake/service.hpp"

namespace {

using namespace exfake;

constexpr int kUsageError = 2;

struct CommonOptions {
  std::string feeds;
  std::string registry;
  std::string model;
  std::string history;
  std::string step_horizon = "0";
  std::string similarity = std::string(JaccardSimilarityBackend::kName);
  std::string nli = std::string(RuleNliBackend::kName);
  bool strict = false;
  bool sequential = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string env_or(const char* name, const std::string& current) {
  if (!current.empty()) return current;
  const char* v = std::getenv(name);
  return v ? v : "";
}

// "90", "90s", "15m", "2h", "1d".
Duration parse_duration(const std::string& text) {
  if (text.empty()) throw UsageError("empty step horizon");
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw UsageError("bad step horizon '" + text + "'");
  }
  const std::string unit = text.substr(used);
  long long scale = 1;
  if (unit.empty() || unit == "s") scale = 1;
  else if (unit == "m") scale = 60;
  else if (unit == "h") scale = 3600;
  else if (unit == "d") scale = 86400;
  else throw UsageError("bad step horizon unit '" + unit + "'");
  if (n < 0) throw UsageError("step horizon must be >= 0");
  return Duration{n * scale};
}

void require_file(const std::string& path, const char* what) {
  if (!std::filesystem::exists(path)) {
    throw UsageError(std::string(what) + " not found: " + path);
  }
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--feeds", o.feeds,
                  "Directory with articles.jsonl and entity_posts.jsonl [env EXFAKE_FEEDS]");
  cmd->add_option("--registry", o.registry, "Entity registry JSON [env EXFAKE_REGISTRY]");
  cmd->add_option("--model", o.model, "Fusion model JSON [env EXFAKE_MODEL]");
  cmd->add_option("--history", o.history,
                  "Score history log; loaded at start, appended to as decisions are made");
  cmd->add_option("--step-horizon", o.step_horizon,
                  "Window advance per timestep, e.g. 3600, 30m, 2h")
      ->capture_default_str();
  cmd->add_option("--similarity", o.similarity, "Similarity backend")->capture_default_str();
  cmd->add_option("--nli", o.nli, "NLI backend")->capture_default_str();
  cmd->add_flag("--strict", o.strict, "Fail on the first malformed feed line");
  cmd->add_flag("--sequential", o.sequential, "Run the three scorers one after another");
}

std::shared_ptr<Orchestrator> build(const CommonOptions& in, std::ostream& diag) {
  CommonOptions o = in;
  o.feeds = env_or("EXFAKE_FEEDS", o.feeds);
  o.registry = env_or("EXFAKE_REGISTRY", o.registry);
  o.model = env_or("EXFAKE_MODEL", o.model);

  OrchestratorConfig cfg;
  cfg.step_horizon = parse_duration(o.step_horizon);
  cfg.parallel = !o.sequential;

  LoadOptions load;
  load.strict = o.strict;
  std::vector<std::string> diagnostics;
  Feeds feeds;
  if (!o.feeds.empty()) {
    if (!std::filesystem::is_directory(o.feeds)) {
      throw UsageError("feeds directory not found: " + o.feeds);
    }
    feeds = load_feed_dir(o.feeds, load, &diagnostics);
  } else {
    diag << "warning: no --feeds given; evidence feeds unavailable\n";
  }

  auto registry = std::make_shared<const EntityRegistry>();
  if (!o.registry.empty()) {
    require_file(o.registry, "registry");
    registry = std::make_shared<const EntityRegistry>(load_registry(o.registry));
  }

  if (!o.model.empty()) {
    require_file(o.model, "model");
    cfg.model = load_model(o.model);
  } else {
    diag << "warning: no --model given; fusion weights are all zero\n";
  }

  Scorers scorers{make_similarity_backend(o.similarity), make_nli_backend(o.nli, cfg.scorer)};

  auto store = std::make_shared<ScoreStore>();
  if (!o.history.empty()) {
    if (std::filesystem::exists(o.history)) store->load_log(o.history);
    store->attach_log(o.history);
  }
  for (const auto& d : diagnostics) diag << "feed: " << d << '\n';
  return std::make_shared<Orchestrator>(std::move(feeds), std::move(registry),
                                        std::move(scorers), std::move(store), cfg);
}

nlohmann::ordered_json run_metadata(const CommonOptions& o, const Orchestrator& orch,
                                    const std::string& dataset) {
  const auto& cfg = orch.config();
  return {{"dataset", dataset},
          {"similarity_backend", orch.scorers().similarity->name()},
          {"nli_backend", orch.scorers().nli->name()},
          {"similarity_threshold", cfg.scorer.similarity_threshold},
          {"step_horizon_seconds", cfg.step_horizon.count()},
          {"timesteps", cfg.timesteps},
          {"model", model_to_json(cfg.model)},
          {"strict", o.strict}};
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw UsageError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainable fake-news scoring: analyze, serve, eval, train, replay"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string text, author, time, post_id, out, dataset, log, host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 42;
  int epochs = TrainingConfig{}.epochs;
  double learning_rate = TrainingConfig{}.learning_rate;
  bool deny_degraded = false, unknown_404 = false;
  std::string decisions;

  auto* analyze = app.add_subcommand("analyze", "Score one post and print its decision");
  add_common(analyze, common);
  analyze->add_option("--text", text, "Post text")->required();
  analyze->add_option("--author", author, "Author handle")->required();
  analyze->add_option("--time", time, "Publication time, e.g. 2016-09-27T01:00:00Z")->required();
  analyze->add_option("--id", post_id, "Post id");
  analyze->add_option("--out", out, "Write the decision here instead of stdout");

  auto* serve = app.add_subcommand("serve", "Run the /v1 HTTP API");
  add_common(serve, common);
  serve->add_option("--port", port, "Listen port")->capture_default_str();
  serve->add_option("--host", host, "Listen address")->capture_default_str();
  serve->add_option("--decisions", decisions, "Decision log; reloaded on start");
  serve->add_flag("--deny-degraded", deny_degraded,
                  "Answer 503 with an error instead of a degraded decision");
  serve->add_flag("--unknown-user-404", unknown_404,
                  "Answer 404 for handles with no history");

  auto* eval = app.add_subcommand("eval", "Evaluate a labeled dataset and print the report");
  add_common(eval, common);
  eval->add_option("--dataset", dataset, "Labeled JSONL dataset")->required();
  eval->add_option("--out", out, "Write the report here instead of stdout");

  auto* train = app.add_subcommand("train", "Fit the fusion neuron on a labeled dataset");
  add_common(train, common);
  train->add_option("--dataset", dataset, "Labeled JSONL dataset")->required();
  train->add_option("--out", out, "Write the model here instead of stdout");
  train->add_option("--seed", seed, "Weight initialisation seed")->capture_default_str();
  train->add_option("--epochs", epochs, "Gradient steps")->capture_default_str();
  train->add_option("--learning-rate", learning_rate, "Initial step size")->capture_default_str();

  auto* replay_cmd = app.add_subcommand("replay", "Analyze every post of a request log in order");
  add_common(replay_cmd, common);
  replay_cmd->add_option("--log", log, "Request log (JSONL)")->required();
  replay_cmd->add_option("--out", out, "Write decisions here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (analyze->parsed()) {
      auto orch = build(common, std::cerr);
      Post post{post_id, text, author, {}};
      try {
        post.published_at = parse_timestamp(time);
      } catch (const ValidationError& e) {
        throw UsageError(e.what());
      }
      Output o(out);
      o.stream() << serialize_decision(orch->analyze(post)) << '\n';
    } else if (serve->parsed()) {
      auto orch = build(common, std::cerr);
      ServiceConfig scfg;
      scfg.allow_degraded = !deny_degraded;
      scfg.unknown_user_404 = unknown_404;
      if (!decisions.empty()) scfg.decision_log = decisions;
      Service service(orch, scfg);
      httplib::Server server;
      service.bind(server);
      std::cerr << "listening on " << host << ":" << port << '\n';
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << '\n';
        return 1;
      }
    } else if (eval->parsed()) {
      require_file(dataset, "dataset");
      auto orch = build(common, std::cerr);
      std::vector<std::string> diagnostics;
      const auto data = load_dataset(dataset, LoadOptions{common.strict}, &diagnostics);
      for (const auto& d : diagnostics) std::cerr << "dataset: " << d << '\n';
      const auto report =
          evaluate(data, *orch, run_metadata(common, *orch, dataset));
      Output o(out);
      o.stream() << report_to_json(report).dump(2) << '\n';
    } else if (train->parsed()) {
      require_file(dataset, "dataset");
      auto orch = build(common, std::cerr);
      std::vector<std::string> diagnostics;
      const auto data = load_dataset(dataset, LoadOptions{common.strict}, &diagnostics);
      for (const auto& d : diagnostics) std::cerr << "dataset: " << d << '\n';
      const auto triples = collect_training_triples(data, *orch, &diagnostics);
      TrainingConfig tcfg;
      tcfg.epochs = epochs;
      tcfg.learning_rate = learning_rate;
      tcfg.seed = seed;
      const auto result = train_fusion(triples, tcfg);
      const double final_loss =
          result.loss_history.empty() ? result.initial_loss : result.loss_history.back();
      std::cerr << "trained on " << triples.size() << " examples, loss "
                << result.initial_loss << " -> " << final_loss << '\n';
      nlohmann::ordered_json meta = {{"dataset", dataset},
                                     {"examples", triples.size()},
                                     {"epochs", epochs},
                                     {"learning_rate", learning_rate},
                                     {"seed", seed},
                                     {"initial_loss", result.initial_loss},
                                     {"final_loss", final_loss}};
      Output o(out);
      o.stream() << model_to_json(result.model, meta).dump(2) << '\n';
    } else if (replay_cmd->parsed()) {
      require_file(log, "request log");
      auto orch = build(common, std::cerr);
      std::ifstream in(log);
      std::vector<std::string> diagnostics;
      const auto decisions_out = replay(*orch, in, &diagnostics);
      for (const auto& d : diagnostics) std::cerr << "log: " << d << '\n';
      Output o(out);
      for (const auto& d : decisions_out) o.stream() << serialize_decision(d) << '\n';
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

// Scores one post against the demo feeds and prints the decision document.
#include <iostream>

#include "exfake/evalharness.hpp"
#include "exfake/orchestrator.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path root = argc > 1 ? argv[1] : ".";

  auto feeds = exfake::load_feed_dir(root / "fixtures/demo");
  auto registry = std::make_shared<const exfake::EntityRegistry>(
      exfake::load_registry(root / "data/registry.example.json"));
  exfake::OrchestratorConfig cfg;
  cfg.model = exfake::load_model(root / "models/forced.json");
  cfg.step_horizon = std::chrono::hours(1);

  exfake::Orchestrator orch(feeds, registry, exfake::Scorers::baseline(), nullptr, cfg);
  exfake::Decision d = orch.analyze({"p1", "Ohio lost manufacturing jobs every year since 2000",
                                     "@rustbelt_news",
                                     exfake::parse_timestamp("2016-09-27T05:00:00Z")});
  std::cout << exfake::serialize_decision(d) << '\n';
  return 0;
}

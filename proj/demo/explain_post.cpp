// Prints the three provisional scores and the highlighted words for a post.
//   explain_post ROOT "post text" AUTHOR TIME
#include <iomanip>
#include <iostream>

#include "exfake/evalharness.hpp"
#include "exfake/orchestrator.hpp"

int main(int argc, char** argv) {
  if (argc != 5) {
    std::cerr << "usage: explain_post ROOT TEXT AUTHOR TIME\n";
    return 2;
  }
  const std::filesystem::path root = argv[1];
  try {
    exfake::OrchestratorConfig cfg;
    cfg.model = exfake::load_model(root / "models/forced.json");
    cfg.step_horizon = std::chrono::hours(1);
    exfake::Orchestrator orch(
        exfake::load_feed_dir(root / "fixtures/demo"),
        std::make_shared<const exfake::EntityRegistry>(
            exfake::load_registry(root / "data/registry.example.json")),
        exfake::Scorers::baseline(), nullptr, cfg);

    const auto d = orch.analyze({"cli", argv[2], argv[3], exfake::parse_timestamp(argv[4])});

    std::cout << std::fixed << std::setprecision(2);
    for (const auto& s : d.steps) {
      std::cout << "step " << s.index << "  until " << exfake::format_timestamp(s.cutoff)
                << "  fact " << s.fact.value << "  source " << s.source.value
                << "  entity " << s.entity.value << "  -> " << s.percentage << '\n';
    }
    std::cout << "final " << d.final_percentage << " (" << exfake::label_name(d.label) << ")\n";
    for (const auto& e : d.entities) std::cout << "entity " << e.entity.canonical << '\n';
    for (const auto& item : d.explanation.items) {
      std::cout << exfake::module_name(item.module) << ' ' << item.evidence_id << ' '
                << exfake::verdict_name(item.verdict) << ':';
      for (const auto& h : item.highlights) std::cout << ' ' << h.word;
      std::cout << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

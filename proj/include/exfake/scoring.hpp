#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exfake/textproc.hpp"

namespace exfake {

enum class ModuleKind { kFact = 0, kSource = 1, kEntity = 2 };

inline std::string_view module_name(ModuleKind m) {
  switch (m) {
    case ModuleKind::kFact: return "fact";
    case ModuleKind::kSource: return "source";
    case ModuleKind::kEntity: return "entity";
  }
  return "fact";
}

// Default value when a module has nothing to say.
inline constexpr double kNoEvidenceScore = 50.0;

// One evidence text as the kernel sees it.
struct EvidenceText {
  std::string_view id;
  std::string_view text;
};

// An evidence item that passed the closeness filter.
struct EvidenceUse {
  std::string item_id;
  double similarity = 0.0;  // normalized, >= threshold
  NliVerdict verdict = NliVerdict::kNeutral;
  double points = 50.0;
  // Backend score of the winning label; the explainer perturbs against it.
  double prediction_score = 0.0;

  bool operator==(const EvidenceUse&) const = default;
};

struct ModuleScore {
  double value = kNoEvidenceScore;
  ModuleKind module = ModuleKind::kFact;
  std::vector<EvidenceUse> evidence;
};

// Shared by Ex-Fact and Ex-Entity: keep evidence whose normalized similarity
// to the post reaches the threshold, run NLI with the post as premise and
// the evidence as hypothesis, and average 100/50/0 points. No close evidence
// gives kNoEvidenceScore.
inline ModuleScore score_evidence(std::string_view post_text,
                                  std::span<const EvidenceText> items,
                                  const Scorers& scorers,
                                  const ScorerConfig& cfg, ModuleKind module) {
  ModuleScore out;
  out.module = module;
  for (const EvidenceText& item : items) {
    const NormalizedSimilarity sim =
        normalize(scorers.similarity->similarity(post_text, item.text));
    if (!is_close(sim, cfg)) continue;
    const NliPrediction pred = scorers.nli->predict(post_text, item.text);
    out.evidence.push_back({std::string(item.id), sim.value(), pred.verdict,
                            points_for(pred.verdict), pred.score()});
  }
  std::sort(out.evidence.begin(), out.evidence.end(),
            [](const EvidenceUse& a, const EvidenceUse& b) {
              if (a.similarity != b.similarity) {
                return a.similarity > b.similarity;
              }
              return a.item_id < b.item_id;
            });
  if (out.evidence.empty()) return out;
  double total = 0.0;
  for (const auto& use : out.evidence) total += use.points;
  out.value = total / static_cast<double>(out.evidence.size());
  return out;
}

}  // namespace exfake

#pragma once

#include <span>
#include <vector>

#include "exfake/records.hpp"
#include "exfake/scoring.hpp"

namespace exfake {

// Scores the post against fact-check claims. The caller restricts `articles`
// to the current evidence window.
inline ModuleScore score_against_articles(
    const Post& post, std::span<const FactCheckArticle> articles,
    const Scorers& scorers, const ScorerConfig& cfg = {}) {
  std::vector<EvidenceText> items;
  items.reserve(articles.size());
  for (const auto& a : articles) items.push_back({a.id, a.claim_text});
  return score_evidence(post.text, items, scorers, cfg, ModuleKind::kFact);
}

}  // namespace exfake

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exfake/common.hpp"
#include "exfake/scoring.hpp"
#include "exfake/textproc.hpp"

namespace exfake {

// ---------------------------------------------------------------------------
// Fusion neuron
// ---------------------------------------------------------------------------

// One sigmoid neuron over (Fact, Source, Entity) scores scaled to [0, 1].
struct FusionModel {
  std::array<double, 3> weights{0.0, 0.0, 0.0};
  double bias = 0.0;

  void validate() const {
    for (double w : weights) {
      if (!std::isfinite(w)) throw InvalidRange("non-finite fusion weight");
    }
    if (!std::isfinite(bias)) throw InvalidRange("non-finite fusion bias");
  }

  bool operator==(const FusionModel&) const = default;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double fusion_logit(const std::array<double, 3>& x,
                           const FusionModel& model) {
  return model.weights[0] * x[0] + model.weights[1] * x[1] +
         model.weights[2] * x[2] + model.bias;
}

// Confidence percentage in the open interval (0, 100). Saturated sigmoid
// values are pulled back inside the interval.
inline double fuse(double fact, double source, double entity,
                   const FusionModel& model) {
  model.validate();
  for (double s : {fact, source, entity}) {
    if (!(s >= 0.0 && s <= 100.0)) {
      throw InvalidRange("module score outside [0, 100]: " + std::to_string(s));
    }
  }
  const double z =
      fusion_logit({fact / 100.0, source / 100.0, entity / 100.0}, model);
  const double pct = 100.0 * sigmoid(z);
  return std::clamp(pct, std::numeric_limits<double>::denorm_min(),
                    std::nextafter(100.0, 0.0));
}

// ---------------------------------------------------------------------------
// Label mapping
// ---------------------------------------------------------------------------

enum class Label {
  kTrue = 0,
  kMostlyTrue = 1,
  kHalfTrue = 2,
  kBarelyTrue = 3,
  kFalse = 4,
  kPantsOnFire = 5,
};

inline constexpr std::size_t kLabelCount = 6;

struct LabelBucket {
  Label label;
  std::string_view name;
  int low;   // inclusive
  int high;  // inclusive
};

inline constexpr std::array<LabelBucket, kLabelCount> kLabelBuckets = {{
    {Label::kTrue, "True", 87, 100},
    {Label::kMostlyTrue, "Mostly true", 70, 86},
    {Label::kHalfTrue, "Half true", 53, 69},
    {Label::kBarelyTrue, "Barely true", 37, 52},
    {Label::kFalse, "False", 21, 36},
    {Label::kPantsOnFire, "Pants on fire", 0, 20},
}};

inline const LabelBucket& bucket_of(Label label) {
  return kLabelBuckets[static_cast<std::size_t>(label)];
}

inline std::string_view label_name(Label label) { return bucket_of(label).name; }

inline Label parse_label(std::string_view name) {
  for (const auto& b : kLabelBuckets) {
    if (b.name == name) return b.label;
  }
  throw ValidationError("unknown label '" + std::string(name) + "'");
}

inline double bucket_midpoint(Label label) {
  const auto& b = bucket_of(label);
  return (b.low + b.high) / 2.0;
}

// Rounds half-up to an integer percentage and returns its bucket.
inline const LabelBucket& map_label(double percentage) {
  if (!(percentage >= 0.0 && percentage <= 100.0)) {
    throw InvalidRange("percentage outside [0, 100]: " +
                       std::to_string(percentage));
  }
  const int rounded = static_cast<int>(std::floor(percentage + 0.5));
  for (const auto& b : kLabelBuckets) {
    if (rounded >= b.low && rounded <= b.high) return b;
  }
  throw InvalidRange("no bucket for " + std::to_string(rounded));
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainingExample {
  std::array<double, 3> scores{};  // Fact, Source, Entity in [0, 100]
  double target = 50.0;            // percentage the neuron should output

  // Targets a gold label's bucket midpoint, e.g. True -> 93.5.
  static TrainingExample labeled(std::array<double, 3> scores, Label gold) {
    return {scores, bucket_midpoint(gold)};
  }
};

struct TrainingConfig {
  int epochs = 4000;
  double learning_rate = 2.0;
  std::uint64_t seed = 42;
  double init_scale = 0.1;
};

struct TrainingResult {
  FusionModel model;
  std::vector<double> loss_history;  // loss after each epoch
  double initial_loss = 0.0;
};

// Mean squared error between fuse()/100 and target/100.
inline double fusion_loss(std::span<const TrainingExample> data,
                          const FusionModel& model) {
  double total = 0.0;
  for (const auto& ex : data) {
    const std::array<double, 3> x{ex.scores[0] / 100.0, ex.scores[1] / 100.0,
                                  ex.scores[2] / 100.0};
    const double err = sigmoid(fusion_logit(x, model)) - ex.target / 100.0;
    total += err * err;
  }
  return total / static_cast<double>(data.size());
}

// Full-batch gradient descent on the squared error. A step that would raise
// the loss is rejected and the rate halved, so the loss history never
// increases. Weights start from a seeded uniform draw.
inline TrainingResult train_fusion(std::span<const TrainingExample> data,
                                   const TrainingConfig& cfg = {}) {
  if (data.empty()) throw InvalidRange("training set is empty");
  if (cfg.epochs < 0 || !(cfg.learning_rate > 0.0)) {
    throw InvalidRange("epochs must be >= 0 and learning_rate > 0");
  }
  for (const auto& ex : data) {
    for (double s : ex.scores) {
      if (!(s >= 0.0 && s <= 100.0)) {
        throw InvalidRange("training score outside [0, 100]");
      }
    }
    if (!(ex.target >= 0.0 && ex.target <= 100.0)) {
      throw InvalidRange("training target outside [0, 100]");
    }
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> init(-cfg.init_scale, cfg.init_scale);
  FusionModel model;
  for (double& w : model.weights) w = init(rng);
  model.bias = init(rng);

  TrainingResult result;
  double loss = fusion_loss(data, model);
  result.initial_loss = loss;
  double rate = cfg.learning_rate;
  const double n = static_cast<double>(data.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::array<double, 4> grad{0.0, 0.0, 0.0, 0.0};
    for (const auto& ex : data) {
      const std::array<double, 3> x{ex.scores[0] / 100.0, ex.scores[1] / 100.0,
                                    ex.scores[2] / 100.0};
      const double out = sigmoid(fusion_logit(x, model));
      const double g =
          2.0 * (out - ex.target / 100.0) * out * (1.0 - out) / n;
      for (int k = 0; k < 3; ++k) grad[k] += g * x[k];
      grad[3] += g;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      FusionModel candidate = model;
      for (int k = 0; k < 3; ++k) candidate.weights[k] -= rate * grad[k];
      candidate.bias -= rate * grad[3];
      const double candidate_loss = fusion_loss(data, candidate);
      if (candidate_loss <= loss) {
        model = candidate;
        loss = candidate_loss;
        accepted = true;
        rate = std::min(rate * 1.1, cfg.learning_rate * 64.0);
      } else {
        rate *= 0.5;
      }
    }
    result.loss_history.push_back(loss);
  }
  result.model = model;
  return result;
}

// ---------------------------------------------------------------------------
// Explanation
// ---------------------------------------------------------------------------

struct Highlight {
  std::size_t position = 0;  // index into the whitespace-split evidence text
  std::string word;
  double delta = 0.0;

  bool operator==(const Highlight&) const = default;
};

// Evidence as handed to the explainer: the kernel's verdict plus the
// metadata shown to the reader.
struct ExplainInput {
  ModuleKind module = ModuleKind::kFact;
  std::string evidence_id;
  std::string text;
  std::string source;
  Timestamp published_at{};
  std::string url;
  double similarity = 0.0;
  NliVerdict verdict = NliVerdict::kNeutral;
  double prediction_score = 0.0;
};

struct ExplanationItem {
  ModuleKind module = ModuleKind::kFact;
  std::string evidence_id;
  std::string text;
  std::string source;
  Timestamp published_at{};
  std::string url;
  NliVerdict verdict = NliVerdict::kNeutral;
  double similarity = 0.0;
  double prediction_score = 0.0;
  std::vector<Highlight> highlights;  // descending delta

  bool operator==(const ExplanationItem&) const = default;
};

struct Explanation {
  std::vector<ExplanationItem> items;

  bool operator==(const Explanation&) const = default;
};

struct ExplainConfig {
  std::size_t top_k = 3;
};

// |score(full) - score(hypothesis without word j)| for every word j, where
// score tracks the label that won on the full hypothesis.
inline std::vector<double> removal_deltas(std::string_view premise,
                                          std::string_view hypothesis,
                                          NliVerdict label, double full_score,
                                          const NliBackend& backend) {
  const std::vector<std::string> words = split_whitespace(hypothesis);
  std::vector<double> deltas(words.size(), 0.0);
  for (std::size_t j = 0; j < words.size(); ++j) {
    std::string reduced;
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (k == j) continue;
      if (!reduced.empty()) reduced.push_back(' ');
      reduced += words[k];
    }
    deltas[j] =
        std::fabs(full_score - backend.predict(premise, reduced).score(label));
  }
  return deltas;
}

// Word-removal explanation over each evidence text (the NLI hypothesis),
// keeping the top-k positions; ties go to the earlier position.
inline Explanation explain(std::string_view post_text,
                           std::span<const ExplainInput> evidence,
                           const NliBackend& backend,
                           const ExplainConfig& cfg = {}) {
  Explanation out;
  for (const auto& ev : evidence) {
    ExplanationItem item;
    item.module = ev.module;
    item.evidence_id = ev.evidence_id;
    item.text = ev.text;
    item.source = ev.source;
    item.published_at = ev.published_at;
    item.url = ev.url;
    item.verdict = ev.verdict;
    item.similarity = ev.similarity;
    item.prediction_score = ev.prediction_score;

    const std::vector<std::string> words = split_whitespace(ev.text);
    const std::vector<double> deltas = removal_deltas(
        post_text, ev.text, ev.verdict, ev.prediction_score, backend);
    std::vector<std::size_t> order(words.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return deltas[a] > deltas[b];
                     });
    const std::size_t keep = std::min(cfg.top_k, order.size());
    for (std::size_t r = 0; r < keep; ++r) {
      const std::size_t pos = order[r];
      item.highlights.push_back({pos, words[pos], deltas[pos]});
    }
    out.items.push_back(std::move(item));
  }
  return out;
}

}  // namespace exfake

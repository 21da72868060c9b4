#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "exfake/common.hpp"
#include "exfake/decision.hpp"
#include "exfake/exdecision.hpp"
#include "exfake/orchestrator.hpp"

namespace exfake {

struct LabeledPost {
  Post post;
  Label gold = Label::kHalfTrue;
};

// {"id", "content", "author", "published_at", "label"}; "text" is accepted
// for "content".
inline LabeledPost labeled_post_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("dataset record must be an object");
  LabeledPost lp;
  lp.post.id = detail::required_string(j, "id");
  lp.post.text = detail::required_string(j, j.contains("content") ? "content" : "text");
  lp.post.author = detail::required_string(j, "author");
  lp.post.published_at = parse_timestamp(detail::required_string(j, "published_at"));
  lp.gold = parse_label(detail::required_string(j, "label"));
  lp.post.validate();
  return lp;
}

inline nlohmann::ordered_json to_json(const LabeledPost& lp) {
  return {{"id", lp.post.id},
          {"content", lp.post.text},
          {"author", lp.post.author},
          {"published_at", format_timestamp(lp.post.published_at)},
          {"label", label_name(lp.gold)}};
}

inline std::vector<LabeledPost> load_dataset(const std::filesystem::path& path,
                                             const LoadOptions& options = {},
                                             std::vector<std::string>* diagnostics = nullptr) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open dataset '" + path.string() + "'");
  std::vector<LabeledPost> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(labeled_post_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      const std::string msg =
          path.string() + ":" + std::to_string(line_no) + ": " + e.what();
      if (options.strict) throw LoadError(msg);
      if (diagnostics) diagnostics->push_back(msg);
    }
  }
  return out;
}

inline Label bucketize(double percentage) { return map_label(percentage).label; }

// ---------------------------------------------------------------------------
// Confusion matrix and macro metrics
// ---------------------------------------------------------------------------

// counts[gold][predicted].
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kLabelCount>, kLabelCount> counts{};

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (const auto& row : counts) {
      for (auto c : row) n += c;
    }
    return n;
  }
  std::uint64_t tp(std::size_t k) const { return counts[k][k]; }
  std::uint64_t fp(std::size_t k) const {
    std::uint64_t n = 0;
    for (std::size_t g = 0; g < kLabelCount; ++g) {
      if (g != k) n += counts[g][k];
    }
    return n;
  }
  std::uint64_t fn(std::size_t k) const {
    std::uint64_t n = 0;
    for (std::size_t p = 0; p < kLabelCount; ++p) {
      if (p != k) n += counts[k][p];
    }
    return n;
  }
  std::uint64_t tn(std::size_t k) const { return total() - tp(k) - fp(k) - fn(k); }

  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(std::span<const Label> predictions,
                                 std::span<const Label> golds) {
  if (predictions.size() != golds.size()) {
    throw ValidationError("predictions and golds differ in length");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    ++cm.counts[static_cast<std::size_t>(golds[i])]
               [static_cast<std::size_t>(predictions[i])];
  }
  return cm;
}

struct ClassMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MacroMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::array<ClassMetrics, kLabelCount> per_class{};
};

namespace detail {
inline double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
}  // namespace detail

// One-vs-rest per class, then the unweighted mean over all six classes.
// A zero denominator gives 0.
inline ClassMetrics class_metrics(const ConfusionMatrix& cm, std::size_t k) {
  const double tp = static_cast<double>(cm.tp(k));
  const double fp = static_cast<double>(cm.fp(k));
  const double fn = static_cast<double>(cm.fn(k));
  const double tn = static_cast<double>(cm.tn(k));
  ClassMetrics m;
  m.accuracy = detail::ratio(tp + tn, tp + tn + fp + fn);
  m.precision = detail::ratio(tp, tp + fp);
  m.recall = detail::ratio(tp, tp + fn);
  m.f1 = detail::ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

inline MacroMetrics macro_metrics(const ConfusionMatrix& cm) {
  MacroMetrics out;
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    out.per_class[k] = class_metrics(cm, k);
    out.accuracy += out.per_class[k].accuracy;
    out.precision += out.per_class[k].precision;
    out.recall += out.per_class[k].recall;
    out.f1 += out.per_class[k].f1;
  }
  const double k = static_cast<double>(kLabelCount);
  out.accuracy /= k;
  out.precision /= k;
  out.recall /= k;
  out.f1 /= k;
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct Prediction {
  std::string id;
  Label gold;
  Label predicted;
  double final_percentage;
};

struct ExcludedPost {
  std::string id;
  std::string error;
};

struct EvalReport {
  std::size_t posts = 0;
  std::vector<Prediction> predictions;
  std::vector<ExcludedPost> excluded;
  ConfusionMatrix confusion;
  std::optional<MacroMetrics> metrics;  // empty when nothing was evaluated
  nlohmann::ordered_json run;           // caller-supplied metadata
};

// Posts in timestamp order (stable); each final is bucketized and compared
// with the gold label. A post whose analysis throws is excluded.
inline EvalReport evaluate(std::span<const LabeledPost> dataset,
                           Orchestrator& orchestrator,
                           nlohmann::ordered_json run = nlohmann::ordered_json::object()) {
  std::vector<const LabeledPost*> order;
  for (const auto& lp : dataset) order.push_back(&lp);
  std::stable_sort(order.begin(), order.end(),
                   [](const LabeledPost* a, const LabeledPost* b) {
                     return a->post.published_at < b->post.published_at;
                   });
  EvalReport report;
  report.posts = dataset.size();
  report.run = std::move(run);
  std::vector<Label> preds;
  std::vector<Label> golds;
  for (const LabeledPost* lp : order) {
    try {
      const Decision d = orchestrator.analyze(lp->post);
      report.predictions.push_back({lp->post.id, lp->gold, d.label, d.final_percentage});
      preds.push_back(d.label);
      golds.push_back(lp->gold);
    } catch (const std::exception& e) {
      report.excluded.push_back({lp->post.id, e.what()});
    }
  }
  report.confusion = confusion(preds, golds);
  if (!preds.empty()) report.metrics = macro_metrics(report.confusion);
  return report;
}

inline constexpr std::string_view kReportSchema = "exfake-eval-report";

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  using oj = nlohmann::ordered_json;
  oj labels = oj::array();
  for (const auto& b : kLabelBuckets) labels.push_back(b.name);
  oj counts = oj::array();
  for (const auto& row : r.confusion.counts) counts.push_back(row);
  oj per_class = oj::array();
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    oj c = {{"label", kLabelBuckets[k].name},
            {"support", r.confusion.tp(k) + r.confusion.fn(k)},
            {"tp", r.confusion.tp(k)},
            {"fp", r.confusion.fp(k)},
            {"fn", r.confusion.fn(k)},
            {"tn", r.confusion.tn(k)}};
    if (r.metrics) {
      const auto& m = r.metrics->per_class[k];
      c["accuracy"] = m.accuracy;
      c["precision"] = m.precision;
      c["recall"] = m.recall;
      c["f1"] = m.f1;
    }
    per_class.push_back(std::move(c));
  }
  oj metrics = nullptr;
  if (r.metrics) {
    metrics = {{"macro_accuracy", r.metrics->accuracy},
               {"macro_precision", r.metrics->precision},
               {"macro_recall", r.metrics->recall},
               {"macro_f1", r.metrics->f1}};
  }
  oj excluded = oj::array();
  for (const auto& e : r.excluded) excluded.push_back({{"id", e.id}, {"error", e.error}});
  oj predictions = oj::array();
  for (const auto& p : r.predictions) {
    predictions.push_back({{"id", p.id},
                           {"gold", label_name(p.gold)},
                           {"predicted", label_name(p.predicted)},
                           {"final", p.final_percentage}});
  }
  return {{"schema", kReportSchema},
          {"version", 1},
          {"posts", r.posts},
          {"evaluated", r.predictions.size()},
          {"excluded", excluded},
          {"metrics", metrics},
          {"per_class", per_class},
          {"confusion", {{"labels", labels}, {"rows", "gold"}, {"counts", counts}}},
          {"predictions", predictions},
          {"run", r.run}};
}

// Runs the pipeline over a labeled split and pairs each post's last-step
// module scores with its gold bucket midpoint.
inline std::vector<TrainingExample> collect_training_triples(
    std::span<const LabeledPost> dataset, Orchestrator& orchestrator,
    std::vector<std::string>* diagnostics = nullptr) {
  std::vector<const LabeledPost*> order;
  for (const auto& lp : dataset) order.push_back(&lp);
  std::stable_sort(order.begin(), order.end(),
                   [](const LabeledPost* a, const LabeledPost* b) {
                     return a->post.published_at < b->post.published_at;
                   });
  std::vector<TrainingExample> out;
  for (const LabeledPost* lp : order) {
    try {
      const Decision d = orchestrator.analyze(lp->post);
      const StepResult& last = d.steps.back();
      out.push_back(TrainingExample::labeled(
          {last.fact.value, last.source.value, last.entity.value}, lp->gold));
    } catch (const std::exception& e) {
      if (diagnostics) diagnostics->push_back(lp->post.id + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

inline constexpr std::string_view kModelFormat = "exfake-fusion";

inline nlohmann::ordered_json model_to_json(
    const FusionModel& m,
    nlohmann::ordered_json training = nlohmann::ordered_json::object()) {
  return {{"format", kModelFormat},
          {"version", 1},
          {"weights", {{"fact", m.weights[0]},
                       {"source", m.weights[1]},
                       {"entity", m.weights[2]}}},
          {"bias", m.bias},
          {"training", std::move(training)}};
}

inline FusionModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != kModelFormat || j.value("version", 0) != 1) {
    throw ValidationError("not an exfake fusion model (version 1)");
  }
  FusionModel m;
  const auto& w = j.at("weights");
  m.weights = {w.at("fact").get<double>(), w.at("source").get<double>(),
               w.at("entity").get<double>()};
  m.bias = j.at("bias").get<double>();
  m.validate();
  return m;
}

inline FusionModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open model '" + path.string() + "'");
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const std::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

}  // namespace exfake

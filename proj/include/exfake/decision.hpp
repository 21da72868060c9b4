#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "exfake/common.hpp"
#include "exfake/exdecision.hpp"
#include "exfake/exentity.hpp"
#include "exfake/exsource.hpp"
#include "exfake/records.hpp"
#include "exfake/scoring.hpp"

namespace exfake {

inline constexpr int kTimesteps = 3;

// Scores and fused percentage for one timestep.
struct StepResult {
  int index = 0;
  Timestamp cutoff{};
  ModuleScore fact{kNoEvidenceScore, ModuleKind::kFact, {}};
  ModuleScore source{kNoEvidenceScore, ModuleKind::kSource, {}};
  ModuleScore entity{kNoEvidenceScore, ModuleKind::kEntity, {}};
  std::size_t fact_window = 0;    // articles visible at this step
  std::size_t entity_window = 0;  // entity posts of resolved handles
  double percentage = 50.0;
};

struct ResolvedEntity {
  NamedEntity entity;
  std::string handle;

  bool operator==(const ResolvedEntity&) const = default;
};

struct Decision {
  std::string id;
  Post post;
  std::vector<StepResult> steps;
  std::array<double, kTimesteps> provisional{50.0, 50.0, 50.0};
  double final_percentage = 50.0;
  Label label = Label::kBarelyTrue;
  SourceSnapshot source;
  std::vector<ResolvedEntity> entities;
  std::vector<std::string> handles;
  bool degraded = false;
  std::vector<std::string> degraded_modules;
  Explanation explanation;
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

using ojson = nlohmann::ordered_json;

inline constexpr std::string_view kDecisionSchema = "exfake-decision";
inline constexpr int kDecisionVersion = 1;

namespace detail {

inline ojson evidence_to_json(const EvidenceUse& e) {
  return {{"item_id", e.item_id},
          {"similarity", e.similarity},
          {"verdict", verdict_name(e.verdict)},
          {"points", e.points},
          {"prediction_score", e.prediction_score}};
}

inline EvidenceUse evidence_from_json(const ojson& j) {
  EvidenceUse e;
  e.item_id = j.at("item_id").get<std::string>();
  e.similarity = j.at("similarity").get<double>();
  e.verdict = parse_verdict(j.at("verdict").get<std::string>());
  e.points = j.at("points").get<double>();
  e.prediction_score = j.at("prediction_score").get<double>();
  return e;
}

inline ojson module_to_json(const ModuleScore& m) {
  ojson ev = ojson::array();
  for (const auto& e : m.evidence) ev.push_back(evidence_to_json(e));
  return {{"score", m.value}, {"evidence", ev}};
}

inline ModuleScore module_from_json(const ojson& j, ModuleKind kind) {
  ModuleScore m;
  m.module = kind;
  m.value = j.at("score").get<double>();
  for (const auto& e : j.at("evidence")) m.evidence.push_back(evidence_from_json(e));
  return m;
}

inline ModuleKind parse_module(const std::string& s) {
  if (s == "fact") return ModuleKind::kFact;
  if (s == "source") return ModuleKind::kSource;
  if (s == "entity") return ModuleKind::kEntity;
  throw ValidationError("unknown module '" + s + "'");
}

inline EntityLabel parse_entity_label_strict(const std::string& s) {
  const auto l = parse_entity_label(s);
  if (!l) throw ValidationError("unknown entity label '" + s + "'");
  return *l;
}

inline ojson optional_number(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

inline std::optional<double> optional_number(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail

inline ojson post_to_json(const Post& p) {
  return {{"id", p.id},
          {"text", p.text},
          {"author", p.author},
          {"published_at", format_timestamp(p.published_at)}};
}

inline ojson explanation_to_json(const Explanation& ex) {
  ojson items = ojson::array();
  for (const auto& it : ex.items) {
    ojson hl = ojson::array();
    for (const auto& h : it.highlights) {
      hl.push_back({{"position", h.position}, {"word", h.word}, {"delta", h.delta}});
    }
    items.push_back({{"module", module_name(it.module)},
                     {"evidence_id", it.evidence_id},
                     {"text", it.text},
                     {"source", it.source},
                     {"published_at", format_timestamp(it.published_at)},
                     {"url", it.url},
                     {"verdict", verdict_name(it.verdict)},
                     {"similarity", it.similarity},
                     {"prediction_score", it.prediction_score},
                     {"highlights", hl}});
  }
  return {{"items", items}};
}

inline Explanation explanation_from_json(const ojson& j) {
  Explanation ex;
  for (const auto& it : j.at("items")) {
    ExplanationItem item;
    item.module = detail::parse_module(it.at("module").get<std::string>());
    item.evidence_id = it.at("evidence_id").get<std::string>();
    item.text = it.at("text").get<std::string>();
    item.source = it.at("source").get<std::string>();
    item.published_at = parse_timestamp(it.at("published_at").get<std::string>());
    item.url = it.at("url").get<std::string>();
    item.verdict = parse_verdict(it.at("verdict").get<std::string>());
    item.similarity = it.at("similarity").get<double>();
    item.prediction_score = it.at("prediction_score").get<double>();
    for (const auto& h : it.at("highlights")) {
      item.highlights.push_back({h.at("position").get<std::size_t>(),
                                 h.at("word").get<std::string>(),
                                 h.at("delta").get<double>()});
    }
    ex.items.push_back(std::move(item));
  }
  return ex;
}

inline ojson decision_to_json(const Decision& d) {
  ojson steps = ojson::array();
  for (const auto& s : d.steps) {
    steps.push_back({{"step", s.index},
                     {"cutoff", format_timestamp(s.cutoff)},
                     {"window", {{"articles", s.fact_window},
                                 {"entity_posts", s.entity_window}}},
                     {"scores", {{"fact", s.fact.value},
                                 {"source", s.source.value},
                                 {"entity", s.entity.value}}},
                     {"percentage", s.percentage},
                     {"evidence", {{"fact", detail::module_to_json(s.fact)["evidence"]},
                                   {"entity", detail::module_to_json(s.entity)["evidence"]}}}});
  }
  ojson entities = ojson::array();
  for (const auto& e : d.entities) {
    entities.push_back({{"surface", e.entity.surface},
                        {"label", entity_label_name(e.entity.label)},
                        {"canonical", e.entity.canonical},
                        {"handle", e.handle}});
  }
  return {{"schema", kDecisionSchema},
          {"version", kDecisionVersion},
          {"id", d.id},
          {"post", post_to_json(d.post)},
          {"provisional", d.provisional},
          {"final", d.final_percentage},
          {"label", label_name(d.label)},
          {"degraded", d.degraded},
          {"degraded_modules", d.degraded_modules},
          {"source", {{"handle", d.source.handle},
                      {"score", d.source.score()},
                      {"N", d.source.count},
                      {"M", detail::optional_number(d.source.mean)},
                      {"D", detail::optional_number(d.source.global.mean)},
                      {"E", d.source.global.min_listing}}},
          {"entities", entities},
          {"handles", d.handles},
          {"steps", steps},
          {"explanation", explanation_to_json(d.explanation)}};
}

inline Decision decision_from_json(const ojson& j) {
  if (j.value("schema", std::string{}) != kDecisionSchema ||
      j.value("version", 0) != kDecisionVersion) {
    throw ValidationError("not an exfake decision (version 1)");
  }
  Decision d;
  d.id = j.at("id").get<std::string>();
  const auto& p = j.at("post");
  d.post = {p.at("id").get<std::string>(), p.at("text").get<std::string>(),
            p.at("author").get<std::string>(),
            parse_timestamp(p.at("published_at").get<std::string>())};
  const auto& prov = j.at("provisional");
  if (!prov.is_array() || prov.size() != kTimesteps) {
    throw ValidationError("decision must carry exactly 3 provisional percentages");
  }
  for (int i = 0; i < kTimesteps; ++i) d.provisional[i] = prov.at(i).get<double>();
  d.final_percentage = j.at("final").get<double>();
  d.label = parse_label(j.at("label").get<std::string>());
  d.degraded = j.at("degraded").get<bool>();
  d.degraded_modules = j.at("degraded_modules").get<std::vector<std::string>>();
  const auto& src = j.at("source");
  d.source.handle = src.at("handle").get<std::string>();
  d.source.count = src.at("N").get<std::size_t>();
  d.source.mean = detail::optional_number(src.at("M"));
  d.source.global.mean = detail::optional_number(src.at("D"));
  d.source.global.min_listing = src.at("E").get<double>();
  for (const auto& e : j.at("entities")) {
    d.entities.push_back(
        {{e.at("surface").get<std::string>(),
          detail::parse_entity_label_strict(e.at("label").get<std::string>()),
          e.at("canonical").get<std::string>()},
         e.at("handle").get<std::string>()});
  }
  d.handles = j.at("handles").get<std::vector<std::string>>();
  for (const auto& s : j.at("steps")) {
    StepResult r;
    r.index = s.at("step").get<int>();
    r.cutoff = parse_timestamp(s.at("cutoff").get<std::string>());
    r.fact_window = s.at("window").at("articles").get<std::size_t>();
    r.entity_window = s.at("window").at("entity_posts").get<std::size_t>();
    const auto& sc = s.at("scores");
    const auto& ev = s.at("evidence");
    r.fact = detail::module_from_json(
        {{"score", sc.at("fact")}, {"evidence", ev.at("fact")}}, ModuleKind::kFact);
    r.source = {sc.at("source").get<double>(), ModuleKind::kSource, {}};
    r.entity = detail::module_from_json(
        {{"score", sc.at("entity")}, {"evidence", ev.at("entity")}},
        ModuleKind::kEntity);
    r.percentage = s.at("percentage").get<double>();
    d.steps.push_back(std::move(r));
  }
  d.explanation = explanation_from_json(j.at("explanation"));
  return d;
}

inline std::string serialize_decision(const Decision& d) {
  return decision_to_json(d).dump();
}

inline Decision parse_decision(std::string_view text) {
  return decision_from_json(ojson::parse(text));
}

}  // namespace exfake

#include "exfake/exdecision.hpp"

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_support.hpp"

namespace exfake {
namespace {

TEST(Fuse, Examples) {
  EXPECT_NEAR(fuse(50, 50, 50, {{1, 1, 1}, -1.5}), 50.0, 1e-9);
  // 100 * sigma(2), evaluated independently in extended precision.
  EXPECT_NEAR(fuse(100, 0, 0, {{2, 0, 0}, 0}), 88.0797077977882444, 1e-6);
  EXPECT_NEAR(fuse(100, 0, 0, {{2, 0, 0}, 0}), 100.0 / (1.0 + std::exp(-2.0)),
              1e-12);
  EXPECT_EQ(fuse(0, 100, 37, {{0, 0, 0}, 0}), 50.0);
}

TEST(Fuse, Rejections) {
  EXPECT_THROW(fuse(50, 50, 50, {{NAN, 0, 0}, 0}), InvalidRange);
  EXPECT_THROW(fuse(50, 50, 50, {{0, 0, 0}, INFINITY}), InvalidRange);
  EXPECT_THROW(fuse(101, 50, 50, {{0, 0, 0}, 0}), InvalidRange);
}

TEST(Fuse, OpenIntervalAndMonotone) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> w(-10, 10);
  std::uniform_real_distribution<double> s(0, 100);
  for (int trial = 0; trial < 2000; ++trial) {
    const FusionModel m{{w(rng), w(rng), w(rng)}, w(rng)};
    const double a = s(rng), b = s(rng), c = s(rng);
    const double p = fuse(a, b, c, m);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 100.0);
    if (m.weights[0] > 0.01 && a < 99.0) {
      EXPECT_LT(p, fuse(a + 1.0, b, c, m));
    }
  }
  EXPECT_LT(fuse(100, 100, 100, {{1e6, 1e6, 1e6}, 0}), 100.0);
  EXPECT_GT(fuse(100, 100, 100, {{-1e6, -1e6, -1e6}, 0}), 0.0);
}

TEST(Fuse, InputOrderIsFactSourceEntity) {
  const FusionModel m{{3.0, -1.0, 0.5}, -0.2};
  const double base = fuse(90, 20, 60, m);
  EXPECT_NE(fuse(20, 90, 60, m), base);
  // Permuting scores together with weights is the only symmetry.
  EXPECT_DOUBLE_EQ(fuse(20, 90, 60, {{-1.0, 3.0, 0.5}, -0.2}), base);
  EXPECT_DOUBLE_EQ(fuse(60, 20, 90, {{0.5, -1.0, 3.0}, -0.2}), base);
}

TEST(MapLabel, TableSpotValues) {
  EXPECT_EQ(map_label(90).label, Label::kTrue);
  EXPECT_EQ(map_label(55).label, Label::kHalfTrue);
  EXPECT_EQ(map_label(86.5).label, Label::kTrue);
  EXPECT_EQ(map_label(86.49).label, Label::kMostlyTrue);
  EXPECT_EQ(map_label(100).label, Label::kTrue);
  EXPECT_EQ(map_label(20).label, Label::kPantsOnFire);
  EXPECT_EQ(map_label(52).label, Label::kBarelyTrue);
  EXPECT_EQ(map_label(0).label, Label::kPantsOnFire);
  EXPECT_THROW(map_label(-0.1), InvalidRange);
  EXPECT_THROW(map_label(100.01), InvalidRange);
}

TEST(MapLabel, TotalAndDisjointOverIntegers) {
  for (int p = 0; p <= 100; ++p) {
    int hits = 0;
    for (const auto& b : kLabelBuckets) hits += (p >= b.low && p <= b.high);
    EXPECT_EQ(hits, 1) << p;
    EXPECT_NO_THROW(map_label(p));
  }
}

TEST(MapLabel, NamesRoundTrip) {
  for (const auto& b : kLabelBuckets) {
    EXPECT_EQ(parse_label(b.name), b.label);
  }
  EXPECT_THROW(parse_label("Mostly false"), ValidationError);
  EXPECT_EQ(bucket_midpoint(Label::kTrue), 93.5);
}

TEST(TrainFusion, ConstantTargetLearnsFifty) {
  std::vector<TrainingExample> data;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> s(0, 100);
  for (int i = 0; i < 50; ++i) data.push_back({{s(rng), s(rng), s(rng)}, 50.0});
  const auto result = train_fusion(data, {});
  for (const auto& ex : data) {
    EXPECT_LT(std::fabs(fuse(ex.scores[0], ex.scores[1], ex.scores[2],
                             result.model) - 50.0), 1.0);
  }
}

TEST(TrainFusion, LossNeverIncreases) {
  std::vector<TrainingExample> data;
  for (int i = 0; i < 40; ++i) {
    const double a = i < 20 ? 10.0 + i : 70.0 + i / 2.0;
    data.push_back(TrainingExample::labeled(
        {a, 50.0, 50.0}, i < 20 ? Label::kFalse : Label::kMostlyTrue));
  }
  const auto result = train_fusion(data, {500, 5.0, 1, 0.1});
  ASSERT_EQ(result.loss_history.size(), 500u);
  double prev = result.initial_loss;
  for (double loss : result.loss_history) {
    EXPECT_LE(loss, prev);
    prev = loss;
  }
  EXPECT_LT(result.loss_history.back(), result.initial_loss);
}

TEST(TrainFusion, SingleExampleConverges) {
  const std::vector<TrainingExample> data(
      10, TrainingExample::labeled({100, 50, 100}, Label::kTrue));
  const auto result = train_fusion(data, {});
  EXPECT_LT(std::fabs(fuse(100, 50, 100, result.model) / 100.0 - 0.935), 0.05);
}

TEST(TrainFusion, SeededRunsAreBitIdentical) {
  std::vector<TrainingExample> data;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> s(0, 100);
  std::uniform_int_distribution<int> l(0, 5);
  for (int i = 0; i < 60; ++i) {
    data.push_back(TrainingExample::labeled({s(rng), s(rng), s(rng)},
                                            static_cast<Label>(l(rng))));
  }
  const auto a = train_fusion(data, {300, 2.0, 77, 0.1});
  const auto b = train_fusion(data, {300, 2.0, 77, 0.1});
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.loss_history, b.loss_history);
  const auto c = train_fusion(data, {300, 2.0, 78, 0.1});
  EXPECT_NE(a.model, c.model);
}

TEST(TrainFusion, Rejections) {
  EXPECT_THROW(train_fusion({}, {}), InvalidRange);
  const std::vector<TrainingExample> bad = {{{120, 0, 0}, 50}};
  EXPECT_THROW(train_fusion(bad, {}), InvalidRange);
}

ExplainInput Evidence(const std::string& text, NliVerdict v, double score) {
  ExplainInput ev;
  ev.module = ModuleKind::kFact;
  ev.evidence_id = "a1";
  ev.text = text;
  ev.source = "PolitiFact";
  ev.url = "https://example.org/a1";
  ev.verdict = v;
  ev.prediction_score = score;
  ev.similarity = 1.0;
  return ev;
}

TEST(Explain, IdenticalHypothesisTiesGoToFirstPositions) {
  const RuleNliBackend nli;
  const std::string post = "Trump called women dogs";
  const auto pred = nli.predict(post, post);
  ASSERT_EQ(pred.verdict, NliVerdict::kEntailment);
  const std::vector<ExplainInput> ev = {Evidence(post, pred.verdict, pred.score())};
  const auto ex = explain(post, ev, nli);
  ASSERT_EQ(ex.items.size(), 1u);
  const auto& h = ex.items[0].highlights;
  ASSERT_EQ(h.size(), 3u);
  // Containment stays 1 after removing any one shared word: all deltas 0.
  EXPECT_EQ(h[0], (Highlight{0, "Trump", 0.0}));
  EXPECT_EQ(h[1], (Highlight{1, "called", 0.0}));
  EXPECT_EQ(h[2], (Highlight{2, "women", 0.0}));
}

TEST(Explain, NegationMarkerDominates) {
  const RuleNliBackend nli;
  const std::string post = "Trump called women dogs";
  const std::string hyp = "Trump did not call women dogs";
  const auto pred = nli.predict(post, hyp);
  ASSERT_EQ(pred.verdict, NliVerdict::kContradiction);
  const std::vector<ExplainInput> ev = {Evidence(hyp, pred.verdict, pred.score())};
  const auto ex = explain(post, ev, nli);
  const auto& h = ex.items[0].highlights;
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(h[0], (Highlight{2, "not", 1.0}));
  EXPECT_EQ(h[1].delta, 0.0);
  EXPECT_EQ(h[1].position, 0u);
}

TEST(Explain, EmptyEvidenceAndSingleToken) {
  const RuleNliBackend nli;
  EXPECT_TRUE(explain("anything", {}, nli).items.empty());

  const auto pred = nli.predict("Trump rallies", "Trump");
  ASSERT_EQ(pred.verdict, NliVerdict::kEntailment);
  const std::vector<ExplainInput> ev = {Evidence("Trump", pred.verdict, pred.score())};
  const auto ex = explain("Trump rallies", ev, nli);
  ASSERT_EQ(ex.items[0].highlights.size(), 1u);
  EXPECT_EQ(ex.items[0].highlights[0], (Highlight{0, "Trump", 1.0}));
}

TEST(Explain, TopKConfigurableAndMetadataCarried) {
  const RuleNliBackend nli;
  const std::string hyp = "Trump never said women are dogs at Hofstra";
  const auto pred = nli.predict("Trump said women are dogs", hyp);
  std::vector<ExplainInput> ev = {Evidence(hyp, pred.verdict, pred.score())};
  ev[0].published_at = parse_timestamp("2016-09-27T02:00:00Z");
  const auto ex = explain("Trump said women are dogs", ev, nli, {5});
  const auto& item = ex.items[0];
  EXPECT_EQ(item.highlights.size(), 5u);
  EXPECT_EQ(item.source, "PolitiFact");
  EXPECT_EQ(item.url, "https://example.org/a1");
  EXPECT_EQ(format_timestamp(item.published_at), "2016-09-27T02:00:00Z");
  for (std::size_t i = 1; i < item.highlights.size(); ++i) {
    EXPECT_GE(item.highlights[i - 1].delta, item.highlights[i].delta);
  }
}

}  // namespace
}  // namespace exfake

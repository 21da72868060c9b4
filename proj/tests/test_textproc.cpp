#include "exfake/textproc.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_support.hpp"

namespace exfake {
namespace {

TEST(Preprocess, PaperStyleTweet) {
  EXPECT_EQ(preprocess("Trump called WOMEN dogs!!"),
            (TokenList{"trump", "call", "women", "dog"}));
}

TEST(Preprocess, EmptyAndAllStopwords) {
  EXPECT_TRUE(preprocess("").empty());
  EXPECT_TRUE(preprocess("the of and").empty());
  EXPECT_TRUE(preprocess("   \t\n ").empty());
}

TEST(Preprocess, DropsEmojiSymbolsAndPunctuation) {
  // U+1F600 grinning face, U+2026 ellipsis, U+201C/D curly quotes.
  EXPECT_EQ(preprocess("\xF0\x9F\x98\x80 \xE2\x80\x9C" "Debate\xE2\x80\x9D "
                       "#Skibabs @ $100 \xE2\x80\xA6"),
            (TokenList{"debat", "skibab", "100"}));
}

TEST(Preprocess, KeepsNegationMarkers) {
  EXPECT_EQ(preprocess("Trump did not call women dogs"),
            (TokenList{"trump", "not", "call", "women", "dog"}));
  EXPECT_EQ(preprocess("He doesn't care"), (TokenList{"doesnt", "care"}));
}

TEST(Preprocess, LatinOneLettersLowercased) {
  EXPECT_EQ(normalize_text("CAF\xC3\x89 na\xC3\xAFve"), "caf\xC3\xA9 na\xC3\xAFve");
}

TEST(Preprocess, InvalidUtf8Dropped) {
  EXPECT_EQ(normalize_text("ab\xFF\xC3" "cd"), "abcd");
}

TEST(Preprocess, IdempotentOnRandomText) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> vocab = {
      "Trump",      "called",  "women",   "dogs!!",    "the",  "not",
      "generalizations", "oscillators", "agreed", "wills", "doing",
      "University", "Hofstra", "debate,", "presidential", "happy",
      "\xF0\x9F\x94\xA5", "nothing", "relational", "ponies", "is", "agre",
      "ties",       "isn't",   "don't",   "hopping",   "sky",  "CAF\xC3\x89"};
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> len(0, 12);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) text += vocab[pick(rng)] + " ";
    const TokenList once = preprocess(text);
    EXPECT_EQ(preprocess(join_tokens(once)), once) << "input: " << text;
    for (const auto& t : once) {
      EXPECT_FALSE(t.empty());
      EXPECT_EQ(normalize_text(t), t);
    }
  }
}

TEST(Porter, MatchesReferenceVocabulary) {
  std::ifstream in(test::data_path("porter_reference.tsv"));
  ASSERT_TRUE(in) << "missing porter_reference.tsv";
  PorterStemmer stemmer;
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos);
    const std::string word = line.substr(0, tab);
    const std::string expected = line.substr(tab + 1);
    EXPECT_EQ(stemmer.stem(word), expected) << word;
    ++checked;
  }
  EXPECT_GT(checked, 2000);
}

TEST(Similarity, Examples) {
  EXPECT_DOUBLE_EQ(similarity({"a", "b"}, {"a", "b"}).value(), 1.0);
  EXPECT_DOUBLE_EQ(similarity({"a", "b"}, {"c", "d"}).value(), -1.0);
  EXPECT_DOUBLE_EQ(similarity({"a", "b", "c"}, {"a", "b", "d"}).value(), 0.0);
  EXPECT_DOUBLE_EQ(similarity({}, {}).value(), 1.0);
  EXPECT_DOUBLE_EQ(similarity({}, {"a"}).value(), -1.0);
}

TEST(Similarity, SymmetricAndSelfIdentical) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const TokenList a = test::random_tokens(rng, 0, 10, 8);
    const TokenList b = test::random_tokens(rng, 0, 10, 8);
    EXPECT_EQ(similarity(a, b).value(), similarity(b, a).value());
    const double s = similarity(a, b).value();
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    if (!a.empty()) {
      EXPECT_EQ(normalize(similarity(a, a)).value(), 1.0);
    }
  }
}

TEST(Normalize, ExamplesAndRange) {
  EXPECT_DOUBLE_EQ(normalize(-1.0).value(), 0.0);
  EXPECT_DOUBLE_EQ(normalize(1.0).value(), 1.0);
  EXPECT_DOUBLE_EQ(normalize(0.6).value(), 0.8);
  EXPECT_THROW(normalize(1.5), InvalidRange);
  EXPECT_THROW(normalize(-1.0000001), InvalidRange);
  EXPECT_THROW(normalize(std::nan("")), InvalidRange);
}

TEST(IsClose, ThresholdInclusive) {
  const ScorerConfig cfg;
  EXPECT_TRUE(is_close(NormalizedSimilarity(0.8), cfg));
  EXPECT_FALSE(is_close(NormalizedSimilarity(0.79), cfg));
  EXPECT_TRUE(is_close(NormalizedSimilarity(1.0), cfg));
}

TEST(ScorerConfig, Validation) {
  ScorerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.similarity_threshold = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidRange);
  cfg.similarity_threshold = 1.0;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Nli, Examples) {
  const TokenList p = {"trump", "call", "women", "dog"};
  EXPECT_EQ(nli(p, p), NliVerdict::kEntailment);
  EXPECT_EQ(nli(p, {"trump", "not", "call", "women", "dog"}),
            NliVerdict::kContradiction);
  EXPECT_EQ(nli({"a", "b", "c", "d"}, {"a", "x", "y", "z"}),
            NliVerdict::kNeutral);
  EXPECT_EQ(nli(p, {}), NliVerdict::kNeutral);
}

TEST(Nli, DoubleNegationRestoresParity) {
  // Containment 3/5 = 0.6 and even parity on both sides.
  EXPECT_EQ(nli({"claim", "true", "stori"},
                {"not", "never", "claim", "true", "stori"}),
            NliVerdict::kEntailment);
}

TEST(Nli, SelfEntailsForNonEmpty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    TokenList x = test::random_tokens(rng, 1, 10, 20);
    if (trial % 3 == 0) x.push_back("not");
    EXPECT_EQ(nli(x, x), NliVerdict::kEntailment);
  }
}

TEST(Nli, ContainmentThresholdBoundary) {
  // 3 of 5 hypothesis tokens shared: containment exactly 0.6.
  EXPECT_EQ(nli({"a", "b", "c"}, {"a", "b", "c", "x", "y"}),
            NliVerdict::kEntailment);
  EXPECT_EQ(nli({"a", "b"}, {"a", "b", "c", "x", "y"}), NliVerdict::kNeutral);
}

TEST(Assets, NegationMarkersAreNotStopwords) {
  const auto& pre = Preprocessor::bundled();
  for (const auto& marker : parse_word_list(assets::kNegations)) {
    EXPECT_FALSE(pre.is_stopword(marker)) << marker;
    EXPECT_EQ(pre(marker).size(), 1u) << marker;
  }
}

TEST(Assets, WordListParser) {
  EXPECT_EQ(parse_word_list("# header\nfoo\n\n  bar  # trailing\n#x\nbaz"),
            (std::vector<std::string>{"foo", "bar", "baz"}));
}

TEST(Backends, BaselineMatchesTokenFunctions) {
  const auto scorers = Scorers::baseline();
  const std::string a = "Trump called women dogs at the debate";
  const std::string b = "Trump did not call women dogs";
  EXPECT_EQ(scorers.similarity->similarity(a, b).value(),
            similarity(preprocess(a), preprocess(b)).value());
  EXPECT_EQ(scorers.nli->predict(a, b).verdict,
            nli(preprocess(a), preprocess(b)));
  EXPECT_EQ(scorers.similarity->name(), "baseline-jaccard");
  EXPECT_EQ(scorers.nli->name(), "baseline-rules");
}

TEST(Backends, SelectByName) {
  EXPECT_NO_THROW(make_similarity_backend("baseline-jaccard"));
  EXPECT_NO_THROW(make_nli_backend("baseline-rules", {}));
  EXPECT_THROW(make_similarity_backend("sbert"), Error);
  EXPECT_THROW(make_nli_backend("sbert-nli", {}), Error);
}

TEST(Backends, Deterministic) {
  const auto scorers = Scorers::baseline();
  const std::string a = "Hillary said the economy is not growing";
  const std::string b = "The economy is growing fast, Hillary said";
  const auto first = scorers.nli->predict(a, b);
  for (int i = 0; i < 10; ++i) {
    const auto again = scorers.nli->predict(a, b);
    EXPECT_EQ(again.verdict, first.verdict);
    EXPECT_EQ(again.scores, first.scores);
  }
}

}  // namespace
}  // namespace exfake

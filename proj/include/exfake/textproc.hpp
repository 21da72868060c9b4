#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "exfake/bundled_assets.hpp"
#include "exfake/common.hpp"
#include "exfake/porter_stemmer.hpp"

namespace exfake {

// Ordered stemmed lowercase tokens. Never contains stopwords or empty tokens.
using TokenList = std::vector<std::string>;

// Text similarity on the [-1, 1] scale produced by similarity backends.
class RawSimilarity {
 public:
  explicit RawSimilarity(double value) : value_(value) {
    if (!(value >= -1.0 && value <= 1.0)) {
      throw InvalidRange("raw similarity outside [-1, 1]: " +
                         std::to_string(value));
    }
  }
  double value() const { return value_; }

 private:
  double value_;
};

// Similarity rescaled to [0, 1]; compared against the closeness threshold.
class NormalizedSimilarity {
 public:
  explicit NormalizedSimilarity(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw InvalidRange("normalized similarity outside [0, 1]: " +
                         std::to_string(value));
    }
  }
  double value() const { return value_; }

 private:
  double value_;
};

enum class NliVerdict { kEntailment = 0, kNeutral = 1, kContradiction = 2 };

inline std::string_view verdict_name(NliVerdict v) {
  switch (v) {
    case NliVerdict::kEntailment: return "entailment";
    case NliVerdict::kNeutral: return "neutral";
    case NliVerdict::kContradiction: return "contradiction";
  }
  return "neutral";
}

inline NliVerdict parse_verdict(std::string_view name) {
  if (name == "entailment") return NliVerdict::kEntailment;
  if (name == "neutral") return NliVerdict::kNeutral;
  if (name == "contradiction") return NliVerdict::kContradiction;
  throw ValidationError("unknown NLI verdict '" + std::string(name) + "'");
}

struct ScorerConfig {
  double similarity_threshold = 0.8;
  static constexpr double kEntailPoints = 100.0;
  static constexpr double kNeutralPoints = 50.0;
  static constexpr double kContradictPoints = 0.0;
  // Baseline NLI only.
  double containment_threshold = 0.6;

  void validate() const {
    if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0)) {
      throw InvalidRange("similarity_threshold must be in (0, 1]");
    }
    if (!(containment_threshold >= 0.0 && containment_threshold <= 1.0)) {
      throw InvalidRange("containment_threshold must be in [0, 1]");
    }
  }
};

inline double points_for(NliVerdict v) {
  switch (v) {
    case NliVerdict::kEntailment: return ScorerConfig::kEntailPoints;
    case NliVerdict::kNeutral: return ScorerConfig::kNeutralPoints;
    case NliVerdict::kContradiction: return ScorerConfig::kContradictPoints;
  }
  return ScorerConfig::kNeutralPoints;
}

// Parses a word-list asset: one token per line, '#' starts a comment, blank
// lines ignored, surrounding whitespace trimmed.
inline std::vector<std::string> parse_word_list(std::string_view content) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos) {
      const auto last = line.find_last_not_of(" \t\r");
      words.emplace_back(line.substr(first, last - first + 1));
    }
    pos = end + 1;
  }
  return words;
}

namespace detail {

// Decodes one UTF-8 code point starting at text[i]; advances i. Malformed
// sequences decode to U+FFFD and consume one byte.
inline char32_t next_code_point(std::string_view text, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= text.size()) return -1;
    const auto b = static_cast<unsigned char>(text[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const int c = cont(k);
    if (c < 0) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  i += len;
  return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
         cp == '\v' || cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x3000;
}

// Letters we keep: ASCII plus the Latin-1 and Latin Extended-A/B blocks.
// Everything else (punctuation, symbols, emoji, other scripts) is dropped.
inline bool is_kept_letter(char32_t cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
  if (cp >= 0x00C0 && cp <= 0x024F) return cp != 0x00D7 && cp != 0x00F7;
  return false;
}

inline char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 32;
  return cp;
}

}  // namespace detail

// Lowercases and keeps only letters, digits and whitespace. Whitespace runs
// become a single ASCII space.
inline std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = detail::next_code_point(text, i);
    if (detail::is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (detail::is_kept_letter(cp) || (cp >= '0' && cp <= '9')) {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      detail::append_utf8(out, detail::to_lower(cp));
    }
  }
  return out;
}

inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' ||
                               text[i] == '\n' || text[i] == '\r')) {
      ++i;
    }
    const std::size_t start = i;
    while (i < text.size() && !(text[i] == ' ' || text[i] == '\t' ||
                                text[i] == '\n' || text[i] == '\r')) {
      ++i;
    }
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

inline std::string join_tokens(const TokenList& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

// lowercase -> strip non letter/digit -> whitespace tokenize -> drop
// stopwords -> stem. The stemmer is run to a fixed point and stems that land
// on a stopword are dropped as well, so preprocess(join(preprocess(x))) ==
// preprocess(x).
class Preprocessor {
 public:
  explicit Preprocessor(const std::vector<std::string>& stopwords) {
    for (const auto& w : stopwords) stopwords_.insert(normalize_text(w));
  }

  static const Preprocessor& bundled() {
    static const Preprocessor instance(
        parse_word_list(assets::kStopwords));
    return instance;
  }

  TokenList operator()(std::string_view text) const {
    TokenList tokens;
    for (auto& word : split_whitespace(normalize_text(text))) {
      if (is_stopword(word)) continue;
      std::string stemmed = stem(word);
      if (stemmed.empty() || is_stopword(stemmed)) continue;
      tokens.push_back(std::move(stemmed));
    }
    return tokens;
  }

  std::string stem(std::string_view word) const {
    std::string current(word);
    for (int round = 0; round < 8; ++round) {
      std::string next = stemmer_.stem(current);
      if (next == current) break;
      current = std::move(next);
    }
    return current;
  }

  bool is_stopword(const std::string& word) const {
    return stopwords_.count(word) > 0;
  }

 private:
  std::unordered_set<std::string> stopwords_;
  PorterStemmer stemmer_;
};

inline TokenList preprocess(std::string_view text) {
  return Preprocessor::bundled()(text);
}

// 2*J(a, b) - 1 over token sets; two empty lists are identical (1).
inline RawSimilarity similarity(const TokenList& a, const TokenList& b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return RawSimilarity(1.0);
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - common;
  const double jaccard =
      static_cast<double>(common) / static_cast<double>(uni);
  return RawSimilarity(2.0 * jaccard - 1.0);
}

inline NormalizedSimilarity normalize(RawSimilarity s) {
  return NormalizedSimilarity((s.value() + 1.0) / 2.0);
}

inline NormalizedSimilarity normalize(double raw) {
  return normalize(RawSimilarity(raw));
}

inline bool is_close(NormalizedSimilarity s, const ScorerConfig& cfg) {
  return s.value() >= cfg.similarity_threshold;
}

// Stemmed negation markers; matched against preprocessed tokens.
class NegationMarkers {
 public:
  NegationMarkers(const std::vector<std::string>& markers,
                  const Preprocessor& pre) {
    for (const auto& m : markers) markers_.insert(pre.stem(normalize_text(m)));
  }

  static const NegationMarkers& bundled() {
    static const NegationMarkers instance(
        parse_word_list(assets::kNegations), Preprocessor::bundled());
    return instance;
  }

  bool contains(const std::string& token) const {
    return markers_.count(token) > 0;
  }

  int count(const TokenList& tokens) const {
    int n = 0;
    for (const auto& t : tokens) n += contains(t) ? 1 : 0;
    return n;
  }

 private:
  std::unordered_set<std::string> markers_;
};

// Verdict plus a per-label score; the score of the winning label is what the
// word-removal explainer tracks.
struct NliPrediction {
  NliVerdict verdict = NliVerdict::kNeutral;
  std::array<double, 3> scores{0.0, 1.0, 0.0};

  double score(NliVerdict label) const {
    return scores[static_cast<std::size_t>(label)];
  }
  double score() const { return score(verdict); }
};

// Rule-based NLI: negation parity, then hypothesis containment.
inline NliPrediction baseline_nli_prediction(
    const TokenList& premise, const TokenList& hypothesis,
    const ScorerConfig& cfg,
    const NegationMarkers& negations = NegationMarkers::bundled()) {
  NliPrediction out;
  if (hypothesis.empty()) return out;

  const bool parity_differs =
      (negations.count(premise) % 2) != (negations.count(hypothesis) % 2);
  if (parity_differs) {
    out.verdict = NliVerdict::kContradiction;
    out.scores = {0.0, 0.0, 1.0};
    return out;
  }
  const std::set<std::string> h(hypothesis.begin(), hypothesis.end());
  const std::set<std::string> p(premise.begin(), premise.end());
  std::size_t shared = 0;
  for (const auto& t : h) shared += p.count(t);
  const double containment =
      static_cast<double>(shared) / static_cast<double>(h.size());
  out.scores = {containment, 1.0 - containment, 0.0};
  out.verdict = containment >= cfg.containment_threshold
                    ? NliVerdict::kEntailment
                    : NliVerdict::kNeutral;
  return out;
}

inline NliVerdict nli(const TokenList& premise, const TokenList& hypothesis,
                      const ScorerConfig& cfg = {}) {
  return baseline_nli_prediction(premise, hypothesis, cfg).verdict;
}

// Pluggable similarity backend: two raw strings in, [-1, 1] out.
class SimilarityBackend {
 public:
  virtual ~SimilarityBackend() = default;
  virtual std::string_view name() const = 0;
  virtual RawSimilarity similarity(std::string_view a,
                                   std::string_view b) const = 0;
};

// Pluggable NLI backend: (premise, hypothesis) raw strings in.
class NliBackend {
 public:
  virtual ~NliBackend() = default;
  virtual std::string_view name() const = 0;
  virtual NliPrediction predict(std::string_view premise,
                                std::string_view hypothesis) const = 0;
};

class JaccardSimilarityBackend : public SimilarityBackend {
 public:
  static constexpr std::string_view kName = "baseline-jaccard";

  explicit JaccardSimilarityBackend(
      const Preprocessor& pre = Preprocessor::bundled())
      : pre_(pre) {}

  std::string_view name() const override { return kName; }
  RawSimilarity similarity(std::string_view a,
                           std::string_view b) const override {
    return exfake::similarity(pre_(a), pre_(b));
  }

 private:
  const Preprocessor& pre_;
};

class RuleNliBackend : public NliBackend {
 public:
  static constexpr std::string_view kName = "baseline-rules";

  explicit RuleNliBackend(ScorerConfig cfg = {},
                          const Preprocessor& pre = Preprocessor::bundled(),
                          const NegationMarkers& negations =
                              NegationMarkers::bundled())
      : cfg_(cfg), pre_(pre), negations_(negations) {}

  std::string_view name() const override { return kName; }
  NliPrediction predict(std::string_view premise,
                        std::string_view hypothesis) const override {
    return baseline_nli_prediction(pre_(premise), pre_(hypothesis), cfg_,
                                   negations_);
  }

 private:
  ScorerConfig cfg_;
  const Preprocessor& pre_;
  const NegationMarkers& negations_;
};

inline std::unique_ptr<SimilarityBackend> make_similarity_backend(
    std::string_view name) {
  if (name == JaccardSimilarityBackend::kName) {
    return std::make_unique<JaccardSimilarityBackend>();
  }
  throw Error("unknown similarity backend '" + std::string(name) + "'");
}

inline std::unique_ptr<NliBackend> make_nli_backend(std::string_view name,
                                                    const ScorerConfig& cfg) {
  if (name == RuleNliBackend::kName) {
    return std::make_unique<RuleNliBackend>(cfg);
  }
  throw Error("unknown NLI backend '" + std::string(name) + "'");
}

// Both backends a scorer needs, bundled for passing around.
struct Scorers {
  std::shared_ptr<const SimilarityBackend> similarity;
  std::shared_ptr<const NliBackend> nli;

  static Scorers baseline(const ScorerConfig& cfg = {}) {
    return {std::make_shared<JaccardSimilarityBackend>(),
            std::make_shared<RuleNliBackend>(cfg)};
  }
};

}  // namespace exfake

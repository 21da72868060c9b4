#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "exfake/records.hpp"
#include "exfake/scoring.hpp"
#include "exfake/textproc.hpp"

namespace exfake {

enum class EntityLabel { kPer, kOrg, kGpe };

inline std::string_view entity_label_name(EntityLabel l) {
  switch (l) {
    case EntityLabel::kPer: return "PER";
    case EntityLabel::kOrg: return "ORG";
    case EntityLabel::kGpe: return "GPE";
  }
  return "PER";
}

// Only PER, ORG and GPE are kept; anything else yields nullopt.
inline std::optional<EntityLabel> parse_entity_label(std::string_view s) {
  if (s == "PER" || s == "PERSON") return EntityLabel::kPer;
  if (s == "ORG") return EntityLabel::kOrg;
  if (s == "GPE") return EntityLabel::kGpe;
  return std::nullopt;
}

struct NamedEntity {
  std::string surface;    // as written in the text, punctuation trimmed
  EntityLabel label = EntityLabel::kPer;
  std::string canonical;  // registry name

  bool operator==(const NamedEntity&) const = default;
};

struct RegistryEntry {
  std::string name;
  std::vector<std::string> aliases;
  std::string label;  // free-form; only PER/ORG/GPE take part in extraction
  std::string handle;
};

namespace detail {

// Matching key for one word: lowercase letters/digits only, with a trailing
// possessive "'s" removed first.
inline std::string match_key(std::string_view word) {
  std::string w(word);
  for (std::string_view suffix : {"'s", "\xE2\x80\x99s", "'S"}) {
    if (w.size() > suffix.size() &&
        std::string_view(w).substr(w.size() - suffix.size()) == suffix) {
      w.resize(w.size() - suffix.size());
      break;
    }
  }
  std::string key = normalize_text(w);
  std::erase(key, ' ');
  return key;
}

inline std::vector<std::string> phrase_keys(std::string_view phrase) {
  std::vector<std::string> keys;
  for (const auto& word : split_whitespace(phrase)) {
    std::string key = match_key(word);
    if (!key.empty()) keys.push_back(std::move(key));
  }
  return keys;
}

inline std::string join_keys(std::span<const std::string> keys) {
  std::string out;
  for (const auto& k : keys) {
    if (!out.empty()) out.push_back(' ');
    out += k;
  }
  return out;
}

}  // namespace detail

// Entity name/alias -> official account. Alias matching is case-insensitive
// and ignores punctuation.
class EntityRegistry {
 public:
  EntityRegistry() = default;

  // Throws ValidationError on a missing handle or label, a duplicate handle
  // or name, or an alias shared by two entities.
  explicit EntityRegistry(std::vector<RegistryEntry> entries)
      : entries_(std::move(entries)) {
    std::set<std::string> handles;
    std::set<std::string> names;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const RegistryEntry& e = entries_[i];
      if (e.name.empty()) throw ValidationError("registry entry with empty name");
      if (e.handle.empty()) {
        throw ValidationError("registry entity '" + e.name + "' has no handle");
      }
      if (e.label.empty()) {
        throw ValidationError("registry entity '" + e.name + "' has no label");
      }
      if (!handles.insert(e.handle).second) {
        throw ValidationError("duplicate handle '" + e.handle +
                              "' (entity '" + e.name + "')");
      }
      if (!names.insert(e.name).second) {
        throw ValidationError("duplicate registry entity '" + e.name + "'");
      }
      by_name_[e.name] = i;
      std::vector<std::string> phrases = e.aliases;
      phrases.push_back(e.name);
      for (const auto& phrase : phrases) {
        const auto keys = detail::phrase_keys(phrase);
        if (keys.empty()) {
          throw ValidationError("alias '" + phrase + "' of entity '" + e.name +
                                "' has no letters or digits");
        }
        const std::string joined = detail::join_keys(keys);
        const auto [it, inserted] = alias_index_.emplace(joined, i);
        if (!inserted && it->second != i) {
          throw ValidationError("alias '" + phrase + "' is shared by '" +
                                entries_[it->second].name + "' and '" +
                                e.name + "'");
        }
        max_alias_words_ = std::max(max_alias_words_, keys.size());
      }
    }
  }

  const std::vector<RegistryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t max_alias_words() const { return max_alias_words_; }

  const RegistryEntry* find(std::string_view name) const {
    const auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? nullptr : &entries_[it->second];
  }

  std::optional<std::size_t> index_of(std::string_view name) const {
    const auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  // Lookup by space-joined match keys.
  std::optional<std::size_t> match(const std::string& joined_keys) const {
    const auto it = alias_index_.find(joined_keys);
    if (it == alias_index_.end()) return std::nullopt;
    return it->second;
  }

  bool has_handle(std::string_view handle) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const RegistryEntry& e) { return e.handle == handle; });
  }

 private:
  std::vector<RegistryEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::unordered_map<std::string, std::size_t> alias_index_;
  std::size_t max_alias_words_ = 0;
};

// Pluggable NER backend.
class EntityRecognizer {
 public:
  virtual ~EntityRecognizer() = default;
  virtual std::vector<NamedEntity> extract(std::string_view text) const = 0;
};

// Longest-match gazetteer over the registry's names and aliases. Results are
// restricted to PER/ORG/GPE, deduplicated by entity, in order of first
// occurrence.
class GazetteerRecognizer : public EntityRecognizer {
 public:
  explicit GazetteerRecognizer(const EntityRegistry& registry)
      : registry_(registry) {}

  std::vector<NamedEntity> extract(std::string_view text) const override {
    struct Word {
      std::size_t begin;  // byte span in text
      std::size_t end;
      std::string key;
    };
    std::vector<Word> words;
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && is_ascii_space(text[i])) ++i;
      const std::size_t start = i;
      while (i < text.size() && !is_ascii_space(text[i])) ++i;
      if (i > start) {
        std::string key = detail::match_key(text.substr(start, i - start));
        if (!key.empty()) words.push_back({start, i, std::move(key)});
      }
    }

    std::vector<NamedEntity> found;
    std::set<std::size_t> seen;
    const std::size_t longest = registry_.max_alias_words();
    std::size_t pos = 0;
    while (pos < words.size()) {
      std::size_t matched_len = 0;
      std::size_t entity = 0;
      const std::size_t max_len = std::min(longest, words.size() - pos);
      for (std::size_t len = max_len; len >= 1; --len) {
        std::string joined;
        for (std::size_t k = pos; k < pos + len; ++k) {
          if (!joined.empty()) joined.push_back(' ');
          joined += words[k].key;
        }
        if (const auto hit = registry_.match(joined)) {
          matched_len = len;
          entity = *hit;
          break;
        }
      }
      if (matched_len == 0) {
        ++pos;
        continue;
      }
      const RegistryEntry& e = registry_.entries()[entity];
      const auto label = parse_entity_label(e.label);
      if (label && seen.insert(entity).second) {
        const std::size_t begin = words[pos].begin;
        const std::size_t end = words[pos + matched_len - 1].end;
        found.push_back(
            {trim_surface(text.substr(begin, end - begin)), *label, e.name});
      }
      pos += matched_len;
    }
    return found;
  }

 private:
  static bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  }

  // Drops leading/trailing characters that carry no letters or digits, and a
  // trailing possessive.
  static std::string trim_surface(std::string_view span) {
    std::size_t first = span.size();
    std::size_t last_end = 0;
    std::size_t i = 0;
    while (i < span.size()) {
      const std::size_t at = i;
      const char32_t cp = detail::next_code_point(span, i);
      const bool kept = detail::is_kept_letter(cp) || (cp >= '0' && cp <= '9');
      if (kept) {
        if (first == span.size()) first = at;
        last_end = i;
      }
    }
    if (first == span.size()) return {};
    std::string out(span.substr(first, last_end - first));
    for (std::string_view suffix : {"'s", "\xE2\x80\x99s", "'S"}) {
      if (out.size() > suffix.size() &&
          std::string_view(out).substr(out.size() - suffix.size()) == suffix) {
        out.resize(out.size() - suffix.size());
        break;
      }
    }
    return out;
  }

  const EntityRegistry& registry_;
};

inline std::vector<NamedEntity> extract_entities(std::string_view text,
                                                 const EntityRegistry& registry) {
  return GazetteerRecognizer(registry).extract(text);
}

// Distinct handles of resolvable entities, in registry declaration order.
inline std::vector<std::string> resolve_accounts(
    std::span<const NamedEntity> entities, const EntityRegistry& registry) {
  std::set<std::size_t> indices;
  for (const auto& ent : entities) {
    if (const auto idx = registry.index_of(ent.canonical)) indices.insert(*idx);
  }
  std::vector<std::pair<std::size_t, std::string>> ordered;
  for (std::size_t idx : indices) {
    ordered.emplace_back(idx, registry.entries()[idx].handle);
  }
  std::sort(ordered.begin(), ordered.end());
  std::vector<std::string> handles;
  for (auto& [idx, handle] : ordered) {
    if (std::find(handles.begin(), handles.end(), handle) == handles.end()) {
      handles.push_back(std::move(handle));
    }
  }
  return handles;
}

// Same kernel as Ex-Fact. The caller restricts `entity_posts` to resolved
// handles and the current window.
inline ModuleScore score_against_entity_posts(
    const Post& post, std::span<const EntityPost> entity_posts,
    const Scorers& scorers, const ScorerConfig& cfg = {}) {
  std::vector<EvidenceText> items;
  items.reserve(entity_posts.size());
  for (const auto& p : entity_posts) items.push_back({p.id, p.text});
  return score_evidence(post.text, items, scorers, cfg, ModuleKind::kEntity);
}

// Keeps posts whose handle is in `handles`.
inline std::vector<EntityPost> filter_by_handles(
    std::span<const EntityPost> posts, std::span<const std::string> handles) {
  const std::set<std::string_view> allowed(handles.begin(), handles.end());
  std::vector<EntityPost> out;
  for (const auto& p : posts) {
    if (allowed.count(p.handle)) out.push_back(p);
  }
  return out;
}

}  // namespace exfake

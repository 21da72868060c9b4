#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "exfake/common.hpp"
#include "exfake/exentity.hpp"
#include "exfake/records.hpp"

namespace exfake {

// Raised by a feed source that cannot serve a window; the orchestrator turns
// it into degraded mode for the affected module.
class FeedUnavailable : public Error {
 public:
  using Error::Error;
};

enum class FeedKind { kArticle, kEntityPost };

inline std::string_view feed_kind_name(FeedKind k) {
  return k == FeedKind::kArticle ? "articles" : "entity_posts";
}

// ---------------------------------------------------------------------------
// Record <-> JSON
// ---------------------------------------------------------------------------

namespace detail {

inline std::string required_string(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw ValidationError(std::string("missing field '") + key + "'");
  }
  if (!it->is_string()) {
    throw ValidationError(std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

inline std::string optional_string(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw ValidationError(std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace detail

inline FactCheckArticle article_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("article record must be an object");
  FactCheckArticle a;
  a.id = detail::required_string(j, "id");
  a.claim_text = detail::required_string(j, "claim_text");
  a.author = detail::optional_string(j, "author");
  a.published_at = parse_timestamp(detail::required_string(j, "published_at"));
  a.url = detail::optional_string(j, "url");
  a.validate();
  return a;
}

inline nlohmann::json to_json(const FactCheckArticle& a) {
  return {{"id", a.id},
          {"claim_text", a.claim_text},
          {"author", a.author},
          {"published_at", format_timestamp(a.published_at)},
          {"url", a.url}};
}

inline EntityPost entity_post_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("entity post record must be an object");
  EntityPost p;
  p.id = detail::required_string(j, "id");
  p.handle = detail::required_string(j, "handle");
  p.text = detail::required_string(j, "text");
  p.published_at = parse_timestamp(detail::required_string(j, "published_at"));
  p.url = detail::optional_string(j, "url");
  p.validate();
  return p;
}

inline nlohmann::json to_json(const EntityPost& p) {
  return {{"id", p.id},
          {"handle", p.handle},
          {"text", p.text},
          {"published_at", format_timestamp(p.published_at)},
          {"url", p.url}};
}

template <typename Record>
Record record_from_json(const nlohmann::json& j);

template <>
inline FactCheckArticle record_from_json<FactCheckArticle>(const nlohmann::json& j) {
  return article_from_json(j);
}

template <>
inline EntityPost record_from_json<EntityPost>(const nlohmann::json& j) {
  return entity_post_from_json(j);
}

// ---------------------------------------------------------------------------
// Feeds
// ---------------------------------------------------------------------------

// Anything that can hand out the items published up to a cutoff.
template <typename Record>
class FeedSource {
 public:
  virtual ~FeedSource() = default;
  // Items with published_at <= cutoff, oldest first. Throws FeedUnavailable.
  virtual std::vector<Record> window(Timestamp cutoff) const = 0;
  virtual std::size_t size() const = 0;
};

// Immutable replay feed, sorted by published_at (stable for equal times).
template <typename Record>
class Feed : public FeedSource<Record> {
 public:
  Feed() = default;

  // Validates each record and rejects duplicate ids.
  explicit Feed(std::vector<Record> items) : items_(std::move(items)) {
    std::set<std::string> ids;
    for (const auto& item : items_) {
      item.validate();
      if (!ids.insert(item.id).second) {
        throw ValidationError("duplicate id '" + item.id + "'");
      }
    }
    std::stable_sort(items_.begin(), items_.end(),
                     [](const Record& a, const Record& b) {
                       return a.published_at < b.published_at;
                     });
  }

  std::span<const Record> items() const { return items_; }
  std::size_t size() const override { return items_.size(); }

  std::span<const Record> window_view(Timestamp cutoff) const {
    const auto end = std::upper_bound(
        items_.begin(), items_.end(), cutoff,
        [](Timestamp t, const Record& r) { return t < r.published_at; });
    return {items_.data(), static_cast<std::size_t>(end - items_.begin())};
  }

  std::vector<Record> window(Timestamp cutoff) const override {
    const auto view = window_view(cutoff);
    return {view.begin(), view.end()};
  }

 private:
  std::vector<Record> items_;
};

// Appendable feed for live ingestion: one writer, readers get copies.
template <typename Record>
class LiveFeed : public FeedSource<Record> {
 public:
  void append(Record item) {
    item.validate();
    std::unique_lock lock(mu_);
    if (!ids_.insert(item.id).second) {
      throw ValidationError("duplicate id '" + item.id + "'");
    }
    const auto pos = std::upper_bound(
        items_.begin(), items_.end(), item.published_at,
        [](Timestamp t, const Record& r) { return t < r.published_at; });
    items_.insert(pos, std::move(item));
  }

  std::vector<Record> window(Timestamp cutoff) const override {
    std::shared_lock lock(mu_);
    std::vector<Record> out;
    for (const auto& r : items_) {
      if (r.published_at > cutoff) break;
      out.push_back(r);
    }
    return out;
  }

  std::size_t size() const override {
    std::shared_lock lock(mu_);
    return items_.size();
  }

 private:
  mutable std::shared_mutex mu_;
  std::vector<Record> items_;
  std::set<std::string> ids_;
};

using ArticleFeed = Feed<FactCheckArticle>;
using EntityPostFeed = Feed<EntityPost>;

struct LoadOptions {
  bool strict = true;  // false: skip bad lines and duplicates, keep going
};

// Reads a line-delimited JSON feed. Blank lines are ignored. In strict mode
// the first bad line or duplicate id throws LoadError; in lenient mode it is
// reported through `diagnostics` and skipped.
template <typename Record>
Feed<Record> load_feed(const std::filesystem::path& path,
                       const LoadOptions& options = {},
                       std::vector<std::string>* diagnostics = nullptr) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open feed '" + path.string() + "'");
  std::vector<Record> items;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  auto report = [&](const std::string& message) {
    const std::string full =
        path.string() + ":" + std::to_string(line_no) + ": " + message;
    if (options.strict) throw LoadError(full);
    if (diagnostics) diagnostics->push_back(full);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Record record;
    try {
      record = record_from_json<Record>(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      report(e.what());
      continue;
    }
    if (!ids.insert(record.id).second) {
      report("duplicate id '" + record.id + "'");
      continue;
    }
    items.push_back(std::move(record));
  }
  return Feed<Record>(std::move(items));
}

inline ArticleFeed load_article_feed(const std::filesystem::path& path,
                                     const LoadOptions& options = {},
                                     std::vector<std::string>* diagnostics = nullptr) {
  return load_feed<FactCheckArticle>(path, options, diagnostics);
}

inline EntityPostFeed load_entity_feed(const std::filesystem::path& path,
                                       const LoadOptions& options = {},
                                       std::vector<std::string>* diagnostics = nullptr) {
  return load_feed<EntityPost>(path, options, diagnostics);
}

// The two feeds the pipeline reads. A null source is unavailable.
struct Feeds {
  std::shared_ptr<const FeedSource<FactCheckArticle>> articles;
  std::shared_ptr<const FeedSource<EntityPost>> entity_posts;
};

// Conventional layout: <dir>/articles.jsonl and <dir>/entity_posts.jsonl.
// A missing file leaves that feed unavailable rather than failing.
inline Feeds load_feed_dir(const std::filesystem::path& dir,
                           const LoadOptions& options = {},
                           std::vector<std::string>* diagnostics = nullptr) {
  Feeds feeds;
  const auto articles = dir / "articles.jsonl";
  const auto entity_posts = dir / "entity_posts.jsonl";
  if (std::filesystem::exists(articles)) {
    feeds.articles = std::make_shared<ArticleFeed>(
        load_article_feed(articles, options, diagnostics));
  } else if (diagnostics) {
    diagnostics->push_back(articles.string() + ": missing, article feed unavailable");
  }
  if (std::filesystem::exists(entity_posts)) {
    feeds.entity_posts = std::make_shared<EntityPostFeed>(
        load_entity_feed(entity_posts, options, diagnostics));
  } else if (diagnostics) {
    diagnostics->push_back(entity_posts.string() +
                           ": missing, entity post feed unavailable");
  }
  return feeds;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

// {"format": "exfake-registry", "version": 1,
//  "entities": {"<name>": {"aliases": [...], "label": "PER", "handle": "@x"}}}
// Entity order in the file is the registry order.
inline EntityRegistry registry_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object() || !doc.contains("entities") ||
      !doc.at("entities").is_object()) {
    throw ValidationError("registry must be an object with an 'entities' object");
  }
  if (doc.value("version", 1) != 1) {
    throw ValidationError("unsupported registry version");
  }
  std::vector<RegistryEntry> entries;
  for (const auto& [name, body] : doc.at("entities").items()) {
    if (!body.is_object()) {
      throw ValidationError("registry entity '" + name + "' must be an object");
    }
    RegistryEntry e;
    e.name = name;
    if (body.contains("handle") && body.at("handle").is_string()) {
      e.handle = body.at("handle").get<std::string>();
    }
    if (body.contains("label") && body.at("label").is_string()) {
      e.label = body.at("label").get<std::string>();
    }
    if (body.contains("aliases")) {
      if (!body.at("aliases").is_array()) {
        throw ValidationError("aliases of '" + name + "' must be an array");
      }
      for (const auto& alias : body.at("aliases")) {
        if (!alias.is_string()) {
          throw ValidationError("aliases of '" + name + "' must be strings");
        }
        e.aliases.push_back(alias.get<std::string>());
      }
    }
    entries.push_back(std::move(e));
  }
  return EntityRegistry(std::move(entries));
}

inline EntityRegistry load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open registry '" + path.string() + "'");
  try {
    return registry_from_json(nlohmann::ordered_json::parse(in));
  } catch (const std::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

}  // namespace exfake

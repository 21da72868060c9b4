#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "exfake/common.hpp"

namespace exfake {

// Score handed to a source with no history.
inline constexpr double kNewUserScore = 50.0;

// Bayesian average (M*N + D*E) / (N + E). N == 0 gives kNewUserScore; an
// undefined corpus mean falls back to the same neutral prior.
inline double bayesian_average(double mean, std::size_t count,
                               std::optional<double> corpus_mean,
                               double min_listing = 1.0) {
  if (count == 0) return kNewUserScore;
  const double n = static_cast<double>(count);
  const double d = corpus_mean.value_or(kNewUserScore);
  return (mean * n + d * min_listing) / (n + min_listing);
}

struct LegitimacyRecord {
  std::string handle;
  std::vector<double> history;
  double sum = 0.0;

  std::size_t count() const { return history.size(); }
  std::optional<double> mean() const {
    if (history.empty()) return std::nullopt;
    return sum / static_cast<double>(history.size());
  }
};

struct GlobalStats {
  std::optional<double> mean;  // D, undefined over an empty corpus
  std::size_t total_posts = 0;
  double min_listing = 1.0;    // E
};

// What Ex-Source needs about one author, frozen at request start.
struct SourceSnapshot {
  std::string handle;
  std::size_t count = 0;      // N
  std::optional<double> mean; // M
  GlobalStats global;

  double score() const {
    return bayesian_average(mean.value_or(0.0), count, global.mean,
                            global.min_listing);
  }
};

struct StoreEvent {
  enum class Kind { kRecord, kRecompute };
  Kind kind = Kind::kRecord;
  std::string handle;
  double percentage = 0.0;
  std::string decision_id;
  Timestamp at{};
};

// Per-user history of final percentages plus corpus statistics. Readers may
// run concurrently; writers are serialized by the orchestrator and guarded
// here by an exclusive lock.
class ScoreStore {
 public:
  explicit ScoreStore(double min_listing = 1.0) {
    if (!(min_listing >= 1.0) || !std::isfinite(min_listing)) {
      throw InvalidRange("min_listing (E) must be >= 1");
    }
    global_.min_listing = min_listing;
  }

  ScoreStore(const ScoreStore& other) {
    std::shared_lock lock(other.mu_);
    users_ = other.users_;
    global_ = other.global_;
    events_ = other.events_;
  }

  double legitimacy_score(const std::string& handle) const {
    return snapshot(handle).score();
  }

  SourceSnapshot snapshot(const std::string& handle) const {
    std::shared_lock lock(mu_);
    SourceSnapshot s;
    s.handle = handle;
    s.global = global_;
    if (const auto it = users_.find(handle); it != users_.end()) {
      s.count = it->second.count();
      s.mean = it->second.mean();
    }
    return s;
  }

  std::optional<LegitimacyRecord> record(const std::string& handle) const {
    std::shared_lock lock(mu_);
    const auto it = users_.find(handle);
    if (it == users_.end()) return std::nullopt;
    return it->second;
  }

  GlobalStats global() const {
    std::shared_lock lock(mu_);
    return global_;
  }

  std::size_t user_count() const {
    std::shared_lock lock(mu_);
    return users_.size();
  }

  // Appends to the author's history. Corpus mean is left stale until
  // recompute_all().
  void record_final(const std::string& handle, double percentage,
                    const std::string& decision_id = {},
                    Timestamp at = Timestamp{}) {
    if (!(percentage >= 0.0 && percentage <= 100.0)) {
      throw InvalidRange("percentage outside [0, 100]: " +
                         std::to_string(percentage));
    }
    std::unique_lock lock(mu_);
    LegitimacyRecord& rec = users_[handle];
    rec.handle = handle;
    rec.history.push_back(percentage);
    rec.sum += percentage;
    events_.push_back(
        {StoreEvent::Kind::kRecord, handle, percentage, decision_id, at});
    if (log_) {
      nlohmann::json line = {{"handle", handle},
                             {"percentage", percentage},
                             {"decision_id", decision_id},
                             {"timestamp", format_timestamp(at)}};
      *log_ << line.dump() << '\n';
      log_->flush();
    }
  }

  // Recomputes D from every stored percentage, in handle order.
  void recompute_all() {
    std::unique_lock lock(mu_);
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& [handle, rec] : users_) {
      for (double p : rec.history) total += p;
      n += rec.history.size();
    }
    global_.total_posts = n;
    global_.mean = n == 0 ? std::nullopt
                          : std::optional<double>(total / static_cast<double>(n));
    events_.push_back({StoreEvent::Kind::kRecompute, {}, 0.0, {}, {}});
  }

  std::vector<StoreEvent> events() const {
    std::shared_lock lock(mu_);
    return events_;
  }

  // Replays a history log written by attach_log(), then recomputes D.
  void load_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open score history '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        const std::string ts = j.value("timestamp", std::string{});
        record_final(j.at("handle").get<std::string>(),
                     j.at("percentage").get<double>(),
                     j.value("decision_id", std::string{}),
                     ts.empty() ? Timestamp{} : parse_timestamp(ts));
      } catch (const std::exception& e) {
        throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
      }
    }
    recompute_all();
  }

  // Every subsequent record_final is appended to `path`.
  void attach_log(const std::filesystem::path& path) {
    std::unique_lock lock(mu_);
    log_ = std::make_unique<std::ofstream>(path, std::ios::app);
    if (!*log_) throw LoadError("cannot open score history '" + path.string() + "'");
  }

  // Compacted form: one JSON document with every user's history.
  nlohmann::json to_snapshot() const {
    std::shared_lock lock(mu_);
    nlohmann::json users = nlohmann::json::object();
    for (const auto& [handle, rec] : users_) users[handle] = rec.history;
    return {{"format", "exfake-score-snapshot"},
            {"version", 1},
            {"min_listing", global_.min_listing},
            {"users", users}};
  }

  static ScoreStore from_snapshot(const nlohmann::json& j) {
    if (j.value("format", std::string{}) != "exfake-score-snapshot" ||
        j.value("version", 0) != 1) {
      throw LoadError("not an exfake score snapshot (version 1)");
    }
    ScoreStore store(j.value("min_listing", 1.0));
    for (const auto& [handle, history] : j.at("users").items()) {
      for (const auto& p : history) store.record_final(handle, p.get<double>());
    }
    store.recompute_all();
    return store;
  }

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, LegitimacyRecord> users_;
  GlobalStats global_;
  std::vector<StoreEvent> events_;
  std::unique_ptr<std::ofstream> log_;
};

}  // namespace exfake

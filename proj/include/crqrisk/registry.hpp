// Copyright 2026 The crqrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CRQRISK_REGISTRY_HPP_
#define CRQRISK_REGISTRY_HPP_

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include "crqrisk/domain.hpp"
#include "crqrisk/pipeline.hpp"

namespace crqrisk {

namespace fs = std::filesystem;

/// Writes `content` to `path` via a synced temp file and rename(2), so
/// readers see either the old or the new file, never a torn one.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw Error(ErrorCode::kIoError, "cannot write '" + tmp.string() + "'");
  const bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size() && std::fflush(f) == 0 &&
                  ::fsync(::fileno(f)) == 0;
  std::fclose(f);
  if (!ok) throw Error(ErrorCode::kIoError, "write to '" + tmp.string() + "' failed");
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "rename to '" + path.string() + "' failed: " + ec.message());
  const int dir = ::open(path.parent_path().empty() ? "." : path.parent_path().c_str(), O_RDONLY);
  if (dir >= 0) {
    ::fsync(dir);
    ::close(dir);
  }
}

inline std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIoError, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

enum class EntryStatus { kStaged, kActive, kRetired };

inline std::string_view to_string(EntryStatus s) {
  switch (s) {
    case EntryStatus::kStaged: return "staged";
    case EntryStatus::kActive: return "active";
    case EntryStatus::kRetired: return "retired";
  }
  return "?";
}

inline EntryStatus parse_entry_status(std::string_view s) {
  if (s == "staged") return EntryStatus::kStaged;
  if (s == "active") return EntryStatus::kActive;
  if (s == "retired") return EntryStatus::kRetired;
  throw Error(ErrorCode::kParseError, "unknown registry status '" + std::string(s) + "'");
}

struct ModelRegistryEntry {
  std::string version;
  std::string model_path;
  TrainConfig training_config;
  std::string schema_version;
  Json training_metrics = Json::object();
  Timestamp created_at = 0;
  EntryStatus status = EntryStatus::kStaged;
  std::string reason;

  bool operator==(const ModelRegistryEntry& o) const {
    return version == o.version && model_path == o.model_path && schema_version == o.schema_version &&
           training_metrics == o.training_metrics && created_at == o.created_at && status == o.status &&
           reason == o.reason;
  }
};

inline void to_json(Json& j, const ModelRegistryEntry& e) {
  j = Json{{"version", e.version},
           {"model_path", e.model_path},
           {"training_config", e.training_config},
           {"schema_version", e.schema_version},
           {"training_metrics", e.training_metrics},
           {"created_at", format_iso8601(e.created_at)},
           {"status", to_string(e.status)},
           {"reason", e.reason}};
}

inline void from_json(const Json& j, ModelRegistryEntry& e) {
  e.version = j.at("version").get<std::string>();
  e.model_path = j.at("model_path").get<std::string>();
  e.training_config = j.at("training_config").get<TrainConfig>();
  e.schema_version = j.at("schema_version").get<std::string>();
  e.training_metrics = j.value("training_metrics", Json::object());
  e.created_at = timestamp_from_json(j.at("created_at"));
  e.status = parse_entry_status(j.at("status").get<std::string>());
  e.reason = j.value("reason", std::string{});
}

/// Directory of versioned model bundles with a single ACTIVE pointer file.
///
///   <root>/models/<version>/bundle.json
///   <root>/models/<version>/entry.json
///   <root>/ACTIVE
///
/// The pointer is authoritative: entry statuses are reconciled against it
/// on open, so a crash between the pointer swap and the status rewrite is
/// harmless. Versions sort lexicographically in creation order.
class ModelRegistry {
 public:
  explicit ModelRegistry(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "models");
    for (const auto& dir : fs::directory_iterator(root_ / "models")) {
      const auto entry_path = dir.path() / "entry.json";
      if (!dir.is_directory() || !fs::exists(entry_path) || !fs::exists(dir.path() / "bundle.json")) continue;
      try {
        auto e = Json::parse(read_file(entry_path)).get<ModelRegistryEntry>();
        entries_.emplace(e.version, std::move(e));
      } catch (const std::exception&) {
        // half-written staging directory; ignored
      }
    }
    if (fs::exists(pointer_path())) {
      auto v = read_file(pointer_path());
      while (!v.empty() && (v.back() == '\n' || v.back() == '\r')) v.pop_back();
      if (entries_.count(v)) active_ = v;
    }
    for (auto& [v, e] : entries_) {
      if (active_ && v == *active_) {
        e.status = EntryStatus::kActive;
      } else if (e.status == EntryStatus::kActive) {
        e.status = EntryStatus::kRetired;
      }
    }
  }

  const fs::path& root() const { return root_; }

  /// Persists a bundle as a new staged version.
  ModelRegistryEntry stage(const ModelBundle& bundle, const std::string& reason, Timestamp now) {
    std::lock_guard<std::mutex> lock(mu_);
    ModelRegistryEntry e;
    e.version = next_version(now);
    const fs::path dir = root_ / "models" / e.version;
    fs::create_directories(dir);
    e.model_path = (dir / "bundle.json").string();
    e.training_config = bundle.model.config;
    e.schema_version = bundle.model.schema_version;
    e.training_metrics = bundle.training_metrics;
    e.created_at = now;
    e.reason = reason;
    write_file_atomic(dir / "bundle.json", Json(bundle).dump());
    write_file_atomic(dir / "entry.json", Json(e).dump(2));
    cache_[e.version] = std::make_shared<const ModelBundle>(bundle);
    entries_.emplace(e.version, e);
    return e;
  }

  /// Atomically points ACTIVE at `version`; the previous active version is
  /// retired.
  void activate(const std::string& version) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(version);
    if (it == entries_.end()) throw Error(ErrorCode::kUnknownVersion, "no model version '" + version + "'");
    write_file_atomic(pointer_path(), version + "\n");
    const auto previous = active_;
    active_ = version;
    if (previous && *previous != version) {
      auto& old = entries_.at(*previous);
      old.status = EntryStatus::kRetired;
      write_file_atomic(root_ / "models" / old.version / "entry.json", Json(old).dump(2));
    }
    it->second.status = EntryStatus::kActive;
    write_file_atomic(root_ / "models" / version / "entry.json", Json(it->second).dump(2));
  }

  std::optional<std::string> active_version() const {
    std::lock_guard<std::mutex> lock(mu_);
    return active_;
  }

  std::optional<ModelRegistryEntry> entry(const std::string& version) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(version);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<ModelRegistryEntry> list() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<ModelRegistryEntry> out;
    for (const auto& [v, e] : entries_) out.push_back(e);
    return out;
  }

  std::shared_ptr<const ModelBundle> load(const std::string& version) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto c = cache_.find(version);
    if (c != cache_.end()) return c->second;
    auto it = entries_.find(version);
    if (it == entries_.end()) throw Error(ErrorCode::kUnknownVersion, "no model version '" + version + "'");
    auto b = std::make_shared<const ModelBundle>(
        Json::parse(read_file(root_ / "models" / version / "bundle.json")).get<ModelBundle>());
    cache_[version] = b;
    return b;
  }

 private:
  fs::path pointer_path() const { return root_ / "ACTIVE"; }

  std::string next_version(Timestamp now) const {
    std::size_t seq = 1;
    if (!entries_.empty()) seq = std::stoul(entries_.rbegin()->first.substr(1, 6)) + 1;
    std::string stamp = format_iso8601(now);
    stamp.erase(std::remove(stamp.begin(), stamp.end(), '-'), stamp.end());
    stamp.erase(std::remove(stamp.begin(), stamp.end(), ':'), stamp.end());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "v%06zu-%s", seq, stamp.c_str());
    return buf;
  }

  fs::path root_;
  mutable std::mutex mu_;
  std::map<std::string, ModelRegistryEntry> entries_;
  std::optional<std::string> active_;
  mutable std::map<std::string, std::shared_ptr<const ModelBundle>> cache_;
};

}  // namespace crqrisk

#endif  // CRQRISK_REGISTRY_HPP_

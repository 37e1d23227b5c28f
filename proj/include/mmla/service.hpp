#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "mmla/config.hpp"
#include "mmla/error.hpp"
#include "mmla/session.hpp"
#include "mmla/store.hpp"

namespace mmla::service {

struct RelabelRequest {
  std::string session_id;
  std::int64_t base_version = 0;
  std::vector<ActivityInterval> activities;  // full replacement
};

using Params = std::map<std::string, std::string>;

inline constexpr std::string_view kAnalyticsKinds[] = {"activity_stats", "correlations", "extrema", "ranking",
                                                        "test_comparison"};

/// Everything the dashboard and the CLI need, on top of a SessionStore. The
/// service keeps no mutable state of its own; every result is computed by the
/// analytics module from the stored session.
class Service {
 public:
  Service(std::shared_ptr<store::SessionStore> store, Config config);

  /// parse -> clock mapping -> clean -> assemble -> anonymize -> persist.
  /// Errors carry the stage that failed.
  std::string ingest_session(const std::filesystem::path& manifest_path);

  /// Validates and commits a full replacement activity list; returns the new
  /// activities_version. Throws NotFound, VersionConflict,
  /// OverlappingActivities, OutOfBounds.
  std::int64_t relabel(const RelabelRequest& req);

  nlohmann::json list_sessions() const;
  nlohmann::json get_session(const std::string& id) const;
  nlohmann::json get_activities(const std::string& id) const;
  nlohmann::json get_stream(const std::string& id, Modality modality, const std::string& source_id,
                            std::optional<std::int64_t> smooth_window_ms,
                            const std::optional<std::string>& activity) const;
  nlohmann::json get_analytics(const std::string& id, std::string_view kind, const Params& params = {}) const;
  nlohmann::json get_media_manifest(const std::string& id) const;
  /// Canonical session document.
  std::string export_session(const std::string& id) const;

  const Config& config() const { return config_; }
  store::SessionStore& store() { return *store_; }

 private:
  std::shared_ptr<store::SessionStore> store_;
  Config config_;
};

/// Default-parameter analytics cached in Session::derived.
nlohmann::json compute_derived(const Session& s, const Config& config);

/// Media-local playback position for a dashboard cursor; negative when the
/// asset has not started yet.
inline std::int64_t media_offset(std::int64_t cursor_ms, std::int64_t master_start_ms) {
  return cursor_ms - master_start_ms;
}

/// HTTP status for an engine error code.
int http_status(ErrorCode code);

}  // namespace mmla::service

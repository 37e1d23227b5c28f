#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmla/analytics.hpp"
#include "mmla/types.hpp"

namespace mmla {

struct MediaAsset {
  std::string media_id;
  MediaKind kind = MediaKind::Screen;
  std::string path;  // relative to the store root
  std::int64_t master_start_ms = 0;
  std::int64_t duration_ms = 0;
  bool operator==(const MediaAsset&) const = default;
};

struct TestPair {
  TestResult pre;
  TestResult post;
  bool operator==(const TestPair&) const = default;
};

/// Anonymized session document. `learner_ref` is deliberately absent.
struct Session {
  std::string session_id;
  std::int64_t session_start_ms = 0;  // epoch of the recording, metadata only
  std::int64_t span_start_ms = 0;     // master-timeline bounds for relabeling
  std::int64_t span_end_ms = 0;
  std::vector<SignalStream> streams;
  std::vector<CleaningReport> cleaning;  // parallel to streams
  std::vector<ActivityInterval> activities;
  std::int64_t activities_version = 1;
  std::vector<MediaAsset> media;
  std::optional<TestPair> tests;
  std::map<std::string, std::string> demographics;
  // Cached analytics; carries the activities_version it was computed from.
  std::optional<nlohmann::json> derived;

  bool operator==(const Session&) const = default;

  const SignalStream* find_stream(Modality m, std::string_view source_id) const;
};

// JSON encodings shared by the store documents and the HTTP payloads.
nlohmann::json to_json(const Sample& s);
nlohmann::json to_json(const ActivityInterval& a);
nlohmann::json to_json(const std::vector<ActivityInterval>& a);
nlohmann::json to_json(const CleaningReport& r);
nlohmann::json to_json(const TestResult& t);
nlohmann::json to_json(const MediaAsset& m);
nlohmann::json to_json(const analytics::ActivityStats& s);
nlohmann::json to_json(const analytics::CorrelationMatrix& m);
nlohmann::json to_json(const analytics::ExtremumEvent& e);
nlohmann::json to_json(const analytics::TestComparison& c);
nlohmann::json to_json(const Session& s);

Session session_from_json(const nlohmann::json& j);
std::vector<ActivityInterval> activities_from_json(const nlohmann::json& j);

/// Canonical text: sorted keys, compact, shortest round-trip numbers, one
/// trailing LF.
std::string canonical(const nlohmann::json& j);

}  // namespace mmla

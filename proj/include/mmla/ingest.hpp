#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mmla/types.hpp"

namespace mmla::ingest {

// A signal file's clock is either given explicitly or estimated from marker
// pairs at assembly time. Absent means identity.
using ClockSpec = std::variant<std::monostate, ClockMapping, std::vector<MarkerPair>>;

struct SignalFileRef {
  std::string path;
  Modality modality = Modality::Attention;
  std::string source_id;
  ClockSpec clock;
  bool operator==(const SignalFileRef&) const = default;
};

struct MediaFileRef {
  std::string path;
  MediaKind kind = MediaKind::Screen;
  std::int64_t source_start_ms = 0;
  std::int64_t duration_ms = 0;
  std::string source_id;
  bool operator==(const MediaFileRef&) const = default;
};

struct TestFiles {
  std::string pretest;
  std::string posttest;
  bool operator==(const TestFiles&) const = default;
};

struct SessionManifest {
  std::string learner_ref;
  std::int64_t session_start_ms = 0;
  std::vector<SignalFileRef> signal_files;
  std::string activity_file;
  std::vector<MediaFileRef> media_files;
  std::optional<TestFiles> test_files;
  std::map<std::string, std::string> demographics;
  bool operator==(const SessionManifest&) const = default;
};

SessionManifest parse_manifest(std::string_view text);
/// Inverse of parse_manifest; re-parsing the result yields an equal manifest.
nlohmann::json manifest_to_json(const SessionManifest& m);

std::vector<RawSample> parse_signal_file(std::string_view text, Modality modality);
std::vector<RawActivityRecord> parse_activity_log(std::string_view text);
TestResult parse_test_file(std::string_view text, TestKind kind);

}  // namespace mmla::ingest

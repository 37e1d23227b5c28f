#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmla {

enum class ErrorCode {
  MalformedManifest,
  InvalidManifest,
  MalformedRow,
  EmptyFile,
  InvalidRecord,
  MalformedTest,
  InvalidTest,
  DegenerateMarkers,
  TooFewSamples,
  AllSamplesDropped,
  OverlappingActivities,
  NoSuchModality,
  MismatchedScales,
  StorageFailure,
  StaleWrite,
  NotFound,
  VersionConflict,
  OutOfBounds,
  UnknownActivity,
  BadParams,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the engine carries a machine-readable code and,
// when it happened inside the ingest pipeline, the stage that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string stage = {})
      : std::runtime_error(message), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(std::string stage, const std::string& prefix = {}) const {
    return Error(code_, prefix.empty() ? what() : prefix + ": " + what(), std::move(stage));
  }

 private:
  ErrorCode code_;
  std::string stage_;
};

}  // namespace mmla

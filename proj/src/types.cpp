#include "mmla/types.hpp"

#include "mmla/error.hpp"

namespace mmla {
namespace {

constexpr std::array<std::pair<Modality, std::string_view>, 9> kModalityNames = {{
    {Modality::Attention, "attention"},
    {Modality::Meditation, "meditation"},
    {Modality::WaveDelta, "wave_delta"},
    {Modality::WaveTheta, "wave_theta"},
    {Modality::WaveAlpha, "wave_alpha"},
    {Modality::WaveBeta, "wave_beta"},
    {Modality::WaveGamma, "wave_gamma"},
    {Modality::HeartRate, "heart_rate"},
    {Modality::PupilDiameter, "pupil_diameter"},
}};

constexpr std::array<std::pair<MediaKind, std::string_view>, 4> kMediaKindNames = {{
    {MediaKind::Screen, "screen"},
    {MediaKind::WebcamFront, "webcam_front"},
    {MediaKind::WebcamSide, "webcam_side"},
    {MediaKind::FixationOverlay, "fixation_overlay"},
}};

}  // namespace

std::string_view to_string(Modality m) {
  for (const auto& [k, name] : kModalityNames)
    if (k == m) return name;
  return "unknown";
}

std::optional<Modality> parse_modality(std::string_view s) {
  for (const auto& [k, name] : kModalityNames)
    if (name == s) return k;
  return std::nullopt;
}

std::string_view to_string(MediaKind k) {
  for (const auto& [kind, name] : kMediaKindNames)
    if (kind == k) return name;
  return "unknown";
}

std::optional<MediaKind> parse_media_kind(std::string_view s) {
  for (const auto& [kind, name] : kMediaKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

std::string_view to_string(TestKind k) { return k == TestKind::Pretest ? "pretest" : "posttest"; }

ValueRange default_range(Modality m) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (m) {
    case Modality::Attention:
    case Modality::Meditation:
      return {0.0, 100.0};
    case Modality::WaveDelta:
    case Modality::WaveTheta:
    case Modality::WaveAlpha:
    case Modality::WaveBeta:
    case Modality::WaveGamma:
      return {0.0, inf};
    case Modality::HeartRate:
      return {25.0, 250.0};
    case Modality::PupilDiameter:
      return {0.0, 12.0, /*lo_exclusive=*/true};
  }
  return {};
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::MalformedTest: return "MalformedTest";
    case ErrorCode::InvalidTest: return "InvalidTest";
    case ErrorCode::DegenerateMarkers: return "DegenerateMarkers";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::AllSamplesDropped: return "AllSamplesDropped";
    case ErrorCode::OverlappingActivities: return "OverlappingActivities";
    case ErrorCode::NoSuchModality: return "NoSuchModality";
    case ErrorCode::MismatchedScales: return "MismatchedScales";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::StaleWrite: return "StaleWrite";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::VersionConflict: return "VersionConflict";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::UnknownActivity: return "UnknownActivity";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace mmla

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mmla {

enum class Modality {
  Attention,
  Meditation,
  WaveDelta,
  WaveTheta,
  WaveAlpha,
  WaveBeta,
  WaveGamma,
  HeartRate,
  PupilDiameter,
};

inline constexpr std::array<Modality, 9> kAllModalities = {
    Modality::Attention, Modality::Meditation, Modality::WaveDelta,
    Modality::WaveTheta, Modality::WaveAlpha,  Modality::WaveBeta,
    Modality::WaveGamma, Modality::HeartRate,  Modality::PupilDiameter,
};

std::string_view to_string(Modality m);
std::optional<Modality> parse_modality(std::string_view s);

enum class MediaKind { Screen, WebcamFront, WebcamSide, FixationOverlay };

std::string_view to_string(MediaKind k);
std::optional<MediaKind> parse_media_kind(std::string_view s);

enum class TestKind { Pretest, Posttest };

std::string_view to_string(TestKind k);

/// Affine map from a device clock onto the master timeline:
/// t_master = scale * t_source + offset_ms.
struct ClockMapping {
  double scale = 1.0;
  double offset_ms = 0.0;

  static ClockMapping identity() { return {}; }

  /// Mapping equivalent to applying `first`, then `*this`.
  ClockMapping after(const ClockMapping& first) const {
    return {scale * first.scale, scale * first.offset_ms + offset_ms};
  }

  bool operator==(const ClockMapping&) const = default;
};

using MarkerPair = std::pair<std::int64_t, std::int64_t>;  // (t_source_ms, t_master_ms)

struct RawSample {
  std::int64_t t_source_ms = 0;
  double value = 0.0;
  bool operator==(const RawSample&) const = default;
};

/// A sample on the master timeline.
struct Sample {
  std::int64_t t_ms = 0;
  double value = 0.0;
  bool operator==(const Sample&) const = default;
};

struct TimeGrid {
  std::int64_t start_ms = 0;
  std::int64_t step_ms = 1;
  std::int64_t count = 1;

  std::int64_t at(std::int64_t k) const { return start_ms + k * step_ms; }
};

/// Half-open span [start_ms, end_ms) on the master timeline.
struct ActivityInterval {
  std::string name;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  bool contains(std::int64_t t) const { return start_ms <= t && t < end_ms; }
  bool operator==(const ActivityInterval&) const = default;
};

inline constexpr std::string_view kUnassigned = "unassigned";

struct RawActivityRecord {
  std::string name;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  bool operator==(const RawActivityRecord&) const = default;
};

struct TestResult {
  TestKind kind = TestKind::Pretest;
  double score = 0.0;
  double max_score = 0.0;
  std::optional<std::vector<double>> per_item;
  bool operator==(const TestResult&) const = default;
};

struct CleaningReport {
  std::size_t input = 0;
  std::size_t non_finite = 0;
  std::size_t out_of_range = 0;
  std::size_t duplicate_timestamp = 0;
  std::size_t reordered = 0;  // samples whose position changed in the stable sort
  bool operator==(const CleaningReport&) const = default;
};

struct SignalStream {
  Modality modality = Modality::Attention;
  std::string source_id;
  std::vector<Sample> samples;
  bool cleaned = false;
  bool operator==(const SignalStream&) const = default;
};

/// Inclusive valid range; either bound may be open (exclusive) for modalities
/// such as pupil diameter whose lower bound is strictly positive.
struct ValueRange {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_exclusive = false;
  bool hi_exclusive = false;

  bool contains(double v) const {
    bool above = lo_exclusive ? v > lo : v >= lo;
    bool below = hi_exclusive ? v < hi : v <= hi;
    return above && below;
  }
  bool operator==(const ValueRange&) const = default;
};

ValueRange default_range(Modality m);

}  // namespace mmla

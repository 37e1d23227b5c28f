#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmla/types.hpp"

namespace mmla::analytics {

inline constexpr std::int64_t kDefaultWindowMs = 30000;
inline constexpr std::int64_t kDefaultCorrelationStepMs = 1000;
inline constexpr double kDefaultProminenceFrac = 0.1;

// ---------------------------------------------------------------------------
// Cleaning and smoothing

struct CleanResult {
  SignalStream stream;
  CleaningReport report;
};

/// Stable-sorts by timestamp, then drops non-finite values, values outside
/// `range` and repeated timestamps (the first surviving sample at a timestamp
/// is kept). Throws AllSamplesDropped when nothing survives.
CleanResult clean_signal(const SignalStream& stream, const ValueRange& range);

/// Trailing time-based moving average: each output sample at t is the mean of
/// every input value with timestamp in [t - window_ms, t]. Input must be
/// cleaned (strictly increasing timestamps). window_ms == 0 is the identity.
std::vector<Sample> smooth_sliding_window(std::span<const Sample> samples,
                                          std::int64_t window_ms = kDefaultWindowMs);
std::vector<Sample> smooth_sliding_window(const SignalStream& stream,
                                          std::int64_t window_ms = kDefaultWindowMs);

// ---------------------------------------------------------------------------
// Segmentation and per-activity statistics

/// Throws OverlappingActivities naming the first overlapping pair (in start
/// order) and InvalidRecord for empty or inverted intervals.
void check_activities(std::span<const ActivityInterval> activities);

/// Activities sorted by start time.
std::vector<ActivityInterval> sorted_by_start(std::span<const ActivityInterval> activities);

struct LabeledStream {
  Modality modality = Modality::Attention;
  std::string source_id;
  std::vector<Sample> samples;
  // Index into `activities` for each sample, or -1 when unassigned.
  std::vector<int> label;
  std::vector<ActivityInterval> activities;  // sorted by start

  std::string_view label_name(std::size_t i) const {
    return label[i] < 0 ? kUnassigned : std::string_view(activities[label[i]].name);
  }
};

LabeledStream segment_by_activity(const SignalStream& stream, std::span<const ActivityInterval> activities);

struct ActivityStats {
  std::string activity_name;
  Modality modality = Modality::Attention;
  std::string source_id;
  std::size_t n = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // population
  bool operator==(const ActivityStats&) const = default;
};

/// One entry per activity name with at least one sample, in order of the
/// name's first start time; the "unassigned" bucket, when non-empty, comes last.
std::vector<ActivityStats> activity_stats(const LabeledStream& labeled);

struct RankEntry {
  std::string activity_name;
  double mean = 0.0;
  bool operator==(const RankEntry&) const = default;
};

/// Activities for one stream by descending mean; ties keep start order.
/// "unassigned" is not ranked. Throws NoSuchModality when nothing matches.
std::vector<RankEntry> rank_activities(std::span<const ActivityStats> stats, Modality modality,
                                       std::string_view source_id);

// ---------------------------------------------------------------------------
// Correlation

struct StreamLabel {
  Modality modality = Modality::Attention;
  std::string source_id;
  bool operator==(const StreamLabel&) const = default;
};

struct CorrelationMatrix {
  std::vector<StreamLabel> labels;
  std::vector<std::vector<std::optional<double>>> r;  // nullopt: undefined
  std::vector<std::vector<std::int64_t>> n_common;
};

/// Pearson r; nullopt when fewer than two points or either series is constant.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct PairGrid {
  std::vector<double> x;
  std::vector<double> y;
};

/// Both series resampled onto the shared grid over the intersection of their
/// spans (optionally clipped to one activity's half-open interval).
PairGrid resample_pair(std::span<const Sample> a, std::span<const Sample> b, std::int64_t step_ms,
                       const ActivityInterval* within = nullptr);

CorrelationMatrix correlate_streams(std::span<const SignalStream> streams,
                                    std::int64_t step_ms = kDefaultCorrelationStepMs,
                                    const ActivityInterval* within = nullptr);

// ---------------------------------------------------------------------------
// Extrema

enum class ExtremumKind { Peak, Trough };

struct ExtremumEvent {
  ExtremumKind kind = ExtremumKind::Peak;
  std::int64_t t_ms = 0;
  double value = 0.0;
  double prominence = 0.0;
  std::string activity_name;
  bool operator==(const ExtremumEvent&) const = default;
};

/// Interior strict local maxima and minima (a plateau counts once, at its
/// first point) whose topographic prominence is at least prominence_frac times
/// the series range. Events are returned in time order.
std::vector<ExtremumEvent> detect_extrema(std::span<const Sample> smoothed,
                                          std::span<const ActivityInterval> activities,
                                          double prominence_frac = kDefaultProminenceFrac);

/// Name of the activity containing t, or "unassigned".
std::string activity_at(std::span<const ActivityInterval> activities, std::int64_t t_ms);

// ---------------------------------------------------------------------------
// Tests

struct TestComparison {
  double pre_score = 0.0;
  double post_score = 0.0;
  double max_score = 0.0;
  double delta = 0.0;
  std::optional<double> relative_gain;  // undefined when pre_score == max_score
  bool operator==(const TestComparison&) const = default;
};

TestComparison compare_tests(const TestResult& pre, const TestResult& post);

}  // namespace mmla::analytics

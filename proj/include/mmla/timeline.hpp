#pragma once

#include <span>
#include <vector>

#include "mmla/types.hpp"

namespace mmla::timeline {

/// Least-squares affine fit of marker pairs. A single pair fixes scale to 1.
/// Throws DegenerateMarkers when two or more pairs share one source time.
ClockMapping estimate_clock_mapping(std::span<const MarkerPair> markers);

/// Rounds a mapped timestamp half away from zero.
std::int64_t map_time(const ClockMapping& m, std::int64_t t_source_ms);

std::vector<Sample> apply_clock_mapping(std::span<const RawSample> samples, const ClockMapping& m);

/// Linear interpolation of `samples` (strictly increasing t_ms, at least two)
/// at each grid point inside [first.t_ms, last.t_ms]. Points outside are
/// omitted. Throws TooFewSamples.
std::vector<Sample> resample_linear(std::span<const Sample> samples, const TimeGrid& grid);

/// Grid with the given step covering [lo, hi] starting at lo; nullopt when the
/// span is empty (hi < lo).
std::optional<TimeGrid> grid_over(std::int64_t lo, std::int64_t hi, std::int64_t step_ms);

}  // namespace mmla::timeline

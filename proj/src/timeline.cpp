#include "mmla/timeline.hpp"

#include <cmath>

#include "mmla/error.hpp"
#include "mmla/kernels.hpp"

namespace mmla::timeline {

ClockMapping estimate_clock_mapping(std::span<const MarkerPair> markers) {
  if (markers.empty()) throw Error(ErrorCode::DegenerateMarkers, "at least one marker pair is required");
  if (markers.size() == 1) {
    const auto& [src, master] = markers.front();
    return {1.0, static_cast<double>(master - src)};
  }

  // Centered normal equations, accumulated in extended precision.
  const long double n = static_cast<long double>(markers.size());
  long double mean_s = 0, mean_m = 0;
  for (const auto& [s, m] : markers) {
    mean_s += s;
    mean_m += m;
  }
  mean_s /= n;
  mean_m /= n;
  long double sxx = 0, sxy = 0;
  for (const auto& [s, m] : markers) {
    long double ds = s - mean_s;
    sxx += ds * ds;
    sxy += ds * (m - mean_m);
  }
  if (sxx == 0) throw Error(ErrorCode::DegenerateMarkers, "all marker pairs share the same source time");
  long double scale = sxy / sxx;
  if (!(scale > 0)) throw Error(ErrorCode::DegenerateMarkers, "fitted clock scale is not positive");
  return {static_cast<double>(scale), static_cast<double>(mean_m - scale * mean_s)};
}

std::int64_t map_time(const ClockMapping& m, std::int64_t t_source_ms) {
  long double t = static_cast<long double>(m.scale) * t_source_ms + m.offset_ms;
  return std::llroundl(t);
}

std::vector<Sample> apply_clock_mapping(std::span<const RawSample> samples, const ClockMapping& m) {
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({map_time(m, s.t_source_ms), s.value});
  return out;
}

std::vector<Sample> resample_linear(std::span<const Sample> samples, const TimeGrid& grid) {
  if (samples.size() < 2) throw Error(ErrorCode::TooFewSamples, "resampling needs at least two samples");

  const std::int64_t first = samples.front().t_ms;
  const std::int64_t last = samples.back().t_ms;

  // Scalar pass: locate the bracketing segment of every in-span grid point.
  std::vector<double> t, t0, t1, v0, v1;
  std::vector<std::int64_t> stamps;
  std::size_t seg = 0;
  for (std::int64_t k = 0; k < grid.count; ++k) {
    const std::int64_t g = grid.at(k);
    if (g < first) continue;
    if (g > last) break;
    while (seg + 1 < samples.size() && samples[seg + 1].t_ms <= g) ++seg;
    stamps.push_back(g);
    t.push_back(static_cast<double>(g));
    if (seg + 1 == samples.size()) {
      // g == last: reproduce the final sample exactly.
      t0.push_back(static_cast<double>(g));
      t1.push_back(static_cast<double>(g) + 1.0);
      v0.push_back(samples[seg].value);
      v1.push_back(samples[seg].value);
    } else {
      t0.push_back(static_cast<double>(samples[seg].t_ms));
      t1.push_back(static_cast<double>(samples[seg + 1].t_ms));
      v0.push_back(samples[seg].value);
      v1.push_back(samples[seg + 1].value);
    }
  }

  std::vector<double> values(stamps.size());
  kernels::lerp({t, t0, t1, v0, v1}, values);

  std::vector<Sample> out(stamps.size());
  for (std::size_t i = 0; i < stamps.size(); ++i) out[i] = {stamps[i], values[i]};
  return out;
}

std::optional<TimeGrid> grid_over(std::int64_t lo, std::int64_t hi, std::int64_t step_ms) {
  if (step_ms <= 0) throw Error(ErrorCode::BadParams, "grid step must be > 0");
  if (hi < lo) return std::nullopt;
  return TimeGrid{lo, step_ms, (hi - lo) / step_ms + 1};
}

}  // namespace mmla::timeline

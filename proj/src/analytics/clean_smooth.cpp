#include <algorithm>
#include <cmath>

#include "mmla/analytics.hpp"
#include "mmla/error.hpp"
#include "mmla/kernels.hpp"

namespace mmla::analytics {

CleanResult clean_signal(const SignalStream& stream, const ValueRange& range) {
  CleanResult out;
  out.report.input = stream.samples.size();

  std::vector<std::size_t> order(stream.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return stream.samples[a].t_ms < stream.samples[b].t_ms;
  });

  out.stream.modality = stream.modality;
  out.stream.source_id = stream.source_id;
  out.stream.cleaned = true;
  auto& kept = out.stream.samples;
  kept.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const Sample& s = stream.samples[order[pos]];
    if (order[pos] != pos) ++out.report.reordered;
    if (!std::isfinite(s.value)) {
      ++out.report.non_finite;
    } else if (!range.contains(s.value)) {
      ++out.report.out_of_range;
    } else if (!kept.empty() && kept.back().t_ms == s.t_ms) {
      ++out.report.duplicate_timestamp;
    } else {
      kept.push_back(s);
    }
  }
  if (kept.empty())
    throw Error(ErrorCode::AllSamplesDropped,
                "every sample of " + std::string(to_string(stream.modality)) + "/" + stream.source_id +
                    " was dropped during cleaning");
  return out;
}

std::vector<Sample> smooth_sliding_window(std::span<const Sample> samples, std::int64_t window_ms) {
  if (window_ms < 0) throw Error(ErrorCode::BadParams, "window_ms must be >= 0");
  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) values[i] = samples[i].value;

  std::vector<Sample> out(samples.size());
  if (samples.empty()) return out;
  // A window mean can round one ulp past the data range; keep it inside.
  const kernels::MinMax bounds = kernels::min_max(values);
  std::size_t lo = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::int64_t from = samples[i].t_ms - window_ms;
    while (samples[lo].t_ms < from) ++lo;
    std::span<const double> window(values.data() + lo, i - lo + 1);
    double mean = kernels::sum(window) / static_cast<double>(window.size());
    out[i] = {samples[i].t_ms, std::clamp(mean, bounds.min, bounds.max)};
  }
  return out;
}

std::vector<Sample> smooth_sliding_window(const SignalStream& stream, std::int64_t window_ms) {
  return smooth_sliding_window(std::span<const Sample>(stream.samples), window_ms);
}

}  // namespace mmla::analytics

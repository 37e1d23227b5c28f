#include <algorithm>
#include <cmath>

#include "mmla/analytics.hpp"
#include "mmla/error.hpp"
#include "mmla/kernels.hpp"
#include "mmla/timeline.hpp"

namespace mmla::analytics {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::nullopt;
  x = x.first(n);
  y = y.first(n);
  // Exact zero-variance test; a centered sum of a constant series can be a
  // tiny non-zero from rounding the mean.
  const auto mx = kernels::min_max(x);
  const auto my = kernels::min_max(y);
  if (mx.min == mx.max || my.min == my.max) return std::nullopt;

  const double mean_x = kernels::sum(x) / static_cast<double>(n);
  const double mean_y = kernels::sum(y) / static_cast<double>(n);
  const auto m = kernels::cross_moments(x, y, mean_x, mean_y);
  return std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
}

PairGrid resample_pair(std::span<const Sample> a, std::span<const Sample> b, std::int64_t step_ms,
                       const ActivityInterval* within) {
  if (step_ms <= 0) throw Error(ErrorCode::BadParams, "correlation step_ms must be > 0");
  PairGrid out;
  if (a.size() < 2 || b.size() < 2) return out;
  std::int64_t lo = std::max(a.front().t_ms, b.front().t_ms);
  std::int64_t hi = std::min(a.back().t_ms, b.back().t_ms);
  if (within != nullptr) {
    lo = std::max(lo, within->start_ms);
    hi = std::min(hi, within->end_ms - 1);
  }
  auto grid = timeline::grid_over(lo, hi, step_ms);
  if (!grid) return out;
  auto ra = timeline::resample_linear(a, *grid);
  auto rb = timeline::resample_linear(b, *grid);
  out.x.reserve(ra.size());
  out.y.reserve(rb.size());
  for (const auto& s : ra) out.x.push_back(s.value);
  for (const auto& s : rb) out.y.push_back(s.value);
  return out;
}

CorrelationMatrix correlate_streams(std::span<const SignalStream> streams, std::int64_t step_ms,
                                    const ActivityInterval* within) {
  if (step_ms <= 0) throw Error(ErrorCode::BadParams, "correlation step_ms must be > 0");
  const std::size_t k = streams.size();
  CorrelationMatrix m;
  m.r.assign(k, std::vector<std::optional<double>>(k));
  m.n_common.assign(k, std::vector<std::int64_t>(k, 0));
  for (const auto& s : streams) m.labels.push_back({s.modality, s.source_id});

  for (std::size_t i = 0; i < k; ++i) {
    m.r[i][i] = 1.0;
    m.n_common[i][i] = static_cast<std::int64_t>(resample_pair(streams[i].samples, streams[i].samples, step_ms, within).x.size());
    for (std::size_t j = i + 1; j < k; ++j) {
      auto grid = resample_pair(streams[i].samples, streams[j].samples, step_ms, within);
      m.r[i][j] = m.r[j][i] = pearson(grid.x, grid.y);
      m.n_common[i][j] = m.n_common[j][i] = static_cast<std::int64_t>(grid.x.size());
    }
  }
  return m;
}

}  // namespace mmla::analytics

#include <algorithm>
#include <cmath>
#include <map>

#include "mmla/analytics.hpp"
#include "mmla/error.hpp"
#include "mmla/kernels.hpp"

namespace mmla::analytics {

std::vector<ActivityInterval> sorted_by_start(std::span<const ActivityInterval> activities) {
  std::vector<ActivityInterval> sorted(activities.begin(), activities.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ActivityInterval& a, const ActivityInterval& b) { return a.start_ms < b.start_ms; });
  return sorted;
}

void check_activities(std::span<const ActivityInterval> activities) {
  for (const auto& a : activities) {
    if (a.name.empty()) throw Error(ErrorCode::InvalidRecord, "activity name must not be empty");
    if (a.start_ms >= a.end_ms)
      throw Error(ErrorCode::InvalidRecord, "activity '" + a.name + "' has start_ms >= end_ms");
  }
  auto sorted = sorted_by_start(activities);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const auto& prev = sorted[i - 1];
    const auto& cur = sorted[i];
    if (cur.start_ms < prev.end_ms) {
      throw Error(ErrorCode::OverlappingActivities,
                  "activities '" + prev.name + "' [" + std::to_string(prev.start_ms) + ", " +
                      std::to_string(prev.end_ms) + ") and '" + cur.name + "' [" +
                      std::to_string(cur.start_ms) + ", " + std::to_string(cur.end_ms) + ") overlap");
    }
  }
}

LabeledStream segment_by_activity(const SignalStream& stream, std::span<const ActivityInterval> activities) {
  check_activities(activities);
  LabeledStream out;
  out.modality = stream.modality;
  out.source_id = stream.source_id;
  out.samples = stream.samples;
  out.activities = sorted_by_start(activities);
  out.label.assign(out.samples.size(), -1);

  const auto& acts = out.activities;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const std::int64_t t = out.samples[i].t_ms;
    // Last interval starting at or before t is the only candidate.
    auto it = std::upper_bound(acts.begin(), acts.end(), t,
                               [](std::int64_t v, const ActivityInterval& a) { return v < a.start_ms; });
    if (it == acts.begin()) continue;
    --it;
    if (t < it->end_ms) out.label[i] = static_cast<int>(it - acts.begin());
  }
  return out;
}

namespace {

ActivityStats summarize(std::string name, const LabeledStream& src, std::span<const double> values) {
  ActivityStats s;
  s.activity_name = std::move(name);
  s.modality = src.modality;
  s.source_id = src.source_id;
  s.n = values.size();
  const kernels::MinMax mm = kernels::min_max(values);
  s.min = mm.min;
  s.max = mm.max;
  s.mean = std::clamp(kernels::sum(values) / static_cast<double>(s.n), s.min, s.max);
  s.stddev = s.min == s.max ? 0.0 : std::sqrt(kernels::sum_sq_dev(values, s.mean) / static_cast<double>(s.n));
  return s;
}

}  // namespace

std::vector<ActivityStats> activity_stats(const LabeledStream& labeled) {
  // Group by activity name, ordered by each name's first start.
  std::vector<std::string> names;
  std::map<std::string, std::size_t, std::less<>> slot;
  for (const auto& a : labeled.activities)
    if (slot.emplace(a.name, names.size()).second) names.push_back(a.name);

  std::vector<std::vector<double>> buckets(names.size());
  std::vector<double> unassigned;
  for (std::size_t i = 0; i < labeled.samples.size(); ++i) {
    const double v = labeled.samples[i].value;
    if (labeled.label[i] < 0)
      unassigned.push_back(v);
    else
      buckets[slot.find(labeled.activities[labeled.label[i]].name)->second].push_back(v);
  }

  std::vector<ActivityStats> out;
  for (std::size_t k = 0; k < names.size(); ++k)
    if (!buckets[k].empty()) out.push_back(summarize(names[k], labeled, buckets[k]));
  if (!unassigned.empty()) out.push_back(summarize(std::string(kUnassigned), labeled, unassigned));
  return out;
}

std::vector<RankEntry> rank_activities(std::span<const ActivityStats> stats, Modality modality,
                                       std::string_view source_id) {
  std::vector<RankEntry> out;
  bool matched = false;
  for (const auto& s : stats) {
    if (s.modality != modality || s.source_id != source_id) continue;
    matched = true;
    if (s.activity_name != kUnassigned) out.push_back({s.activity_name, s.mean});
  }
  if (!matched)
    throw Error(ErrorCode::NoSuchModality,
                "no statistics for " + std::string(to_string(modality)) + "/" + std::string(source_id));
  std::stable_sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) { return a.mean > b.mean; });
  return out;
}

}  // namespace mmla::analytics

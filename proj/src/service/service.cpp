#include "mmla/service.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>

#include "mmla/analytics.hpp"
#include "mmla/error.hpp"
#include "mmla/ingest.hpp"
#include "mmla/timeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mmla::service {
namespace {

std::string read_text(const fs::path& p, const std::string& stage) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string(), stage);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Runs `fn`, re-throwing engine errors annotated with stage and file.
template <typename Fn>
auto staged(const std::string& stage, const std::string& file, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage, file);
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

ClockMapping resolve_clock(const ingest::ClockSpec& spec) {
  if (const auto* m = std::get_if<ClockMapping>(&spec)) return *m;
  if (const auto* markers = std::get_if<std::vector<MarkerPair>>(&spec))
    return timeline::estimate_clock_mapping(*markers);
  return ClockMapping::identity();
}

// ---------------------------------------------------------------------------
// Analytics payloads. Each one is a direct formatting of analytics results.

json stats_payload(const Session& s) {
  json out = json::array();
  for (const auto& stream : s.streams) {
    auto labeled = analytics::segment_by_activity(stream, s.activities);
    for (const auto& st : analytics::activity_stats(labeled)) out.push_back(to_json(st));
  }
  return out;
}

json extrema_payload(const Session& s, std::int64_t window_ms, double prominence_frac) {
  json out = json::array();
  auto activities = analytics::sorted_by_start(s.activities);
  for (const auto& stream : s.streams) {
    auto smoothed = analytics::smooth_sliding_window(stream, window_ms);
    json events = json::array();
    for (const auto& e : analytics::detect_extrema(smoothed, activities, prominence_frac)) events.push_back(to_json(e));
    out.push_back({{"modality", to_string(stream.modality)},
                   {"source_id", stream.source_id},
                   {"window_ms", window_ms},
                   {"prominence_frac", prominence_frac},
                   {"events", std::move(events)}});
  }
  return out;
}

json correlations_payload(const Session& s, std::int64_t step_ms, const ActivityInterval* within) {
  json j = to_json(analytics::correlate_streams(s.streams, step_ms, within));
  j["step_ms"] = step_ms;
  j["activity"] = within != nullptr ? json(within->name) : json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// Parameter parsing

std::int64_t param_int(const Params& p, const std::string& key, std::int64_t fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  std::int64_t v = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error(ErrorCode::BadParams, key + " must be an integer");
  return v;
}

double param_real(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  double v = 0;
  const auto& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw Error(ErrorCode::BadParams, key + " must be a number");
  return v;
}

void allow_params(const Params& p, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : p)
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorCode::BadParams, "unknown parameter '" + key + "'");
}

Modality param_modality(const Params& p) {
  auto it = p.find("modality");
  if (it == p.end()) throw Error(ErrorCode::BadParams, "parameter 'modality' is required");
  auto m = parse_modality(it->second);
  if (!m) throw Error(ErrorCode::BadParams, "unknown modality '" + it->second + "'");
  return *m;
}

// Earliest-starting interval with the given name.
const ActivityInterval& find_activity(const Session& s, const std::string& name) {
  const ActivityInterval* found = nullptr;
  for (const auto& a : s.activities)
    if (a.name == name && (found == nullptr || a.start_ms < found->start_ms)) found = &a;
  if (found == nullptr) throw Error(ErrorCode::UnknownActivity, "no activity named '" + name + "'");
  return *found;
}

bool cache_valid(const Session& s) {
  return s.derived && s.derived->value("activities_version", std::int64_t{0}) == s.activities_version;
}

}  // namespace

json compute_derived(const Session& s, const Config& config) {
  return {{"activities_version", s.activities_version},
          {"window_ms", config.window_ms},
          {"prominence_frac", config.prominence_frac},
          {"correlation_step_ms", config.correlation_step_ms},
          {"activity_stats", stats_payload(s)},
          {"extrema", extrema_payload(s, config.window_ms, config.prominence_frac)},
          {"correlations", correlations_payload(s, config.correlation_step_ms, nullptr)}};
}

Service::Service(std::shared_ptr<store::SessionStore> store, Config config)
    : store_(std::move(store)), config_(std::move(config)) {}

std::string Service::ingest_session(const fs::path& manifest_path) {
  const std::string manifest_text = read_text(manifest_path, "read_manifest");
  const auto manifest = staged("parse_manifest", manifest_path.string(),
                               [&] { return ingest::parse_manifest(manifest_text); });
  const fs::path base = manifest_path.parent_path();

  Session s;
  s.session_start_ms = manifest.session_start_ms;
  s.demographics = manifest.demographics;

  std::map<std::string, ClockMapping> source_clocks;
  for (const auto& ref : manifest.signal_files) {
    const fs::path path = resolve(base, ref.path);
    const std::string text = read_text(path, "parse_signal_file");
    auto raw = staged("parse_signal_file", path.string(), [&] { return ingest::parse_signal_file(text, ref.modality); });
    const ClockMapping clock = staged("clock_mapping", path.string(), [&] { return resolve_clock(ref.clock); });
    if (!std::holds_alternative<std::monostate>(ref.clock)) source_clocks.emplace(ref.source_id, clock);

    SignalStream stream{ref.modality, ref.source_id, timeline::apply_clock_mapping(raw, clock), false};
    auto cleaned = staged("clean_signal", path.string(),
                          [&] { return analytics::clean_signal(stream, config_.range_for(ref.modality)); });
    s.streams.push_back(std::move(cleaned.stream));
    s.cleaning.push_back(cleaned.report);
  }

  {
    const fs::path path = resolve(base, manifest.activity_file);
    const std::string text = read_text(path, "parse_activity_log");
    auto records = staged("parse_activity_log", path.string(), [&] { return ingest::parse_activity_log(text); });
    for (auto& r : records) s.activities.push_back({std::move(r.name), r.start_ms, r.end_ms});
    staged("assemble", path.string(), [&] {
      analytics::check_activities(s.activities);
      return 0;
    });
  }

  if (manifest.test_files) {
    const fs::path pre_path = resolve(base, manifest.test_files->pretest);
    const fs::path post_path = resolve(base, manifest.test_files->posttest);
    const std::string pre_text = read_text(pre_path, "parse_test_file");
    const std::string post_text = read_text(post_path, "parse_test_file");
    s.tests = TestPair{
        staged("parse_test_file", pre_path.string(), [&] { return ingest::parse_test_file(pre_text, TestKind::Pretest); }),
        staged("parse_test_file", post_path.string(),
               [&] { return ingest::parse_test_file(post_text, TestKind::Posttest); })};
  }

  // Session span on the master timeline; relabeled intervals must stay inside.
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& a : s.activities) {
    lo = std::min(lo, a.start_ms);
    hi = std::max(hi, a.end_ms);
  }
  for (const auto& st : s.streams) {
    lo = std::min(lo, st.samples.front().t_ms);
    hi = std::max(hi, st.samples.back().t_ms + 1);
  }

  const auto anon = store::anonymize(manifest, *store_);
  s.session_id = anon.session_id;

  for (std::size_t i = 0; i < manifest.media_files.size(); ++i) {
    const auto& ref = manifest.media_files[i];
    auto clock = source_clocks.find(ref.source_id);
    MediaAsset asset;
    asset.media_id = "m" + std::to_string(i) + "_" + std::string(to_string(ref.kind));
    asset.kind = ref.kind;
    asset.master_start_ms =
        timeline::map_time(clock == source_clocks.end() ? ClockMapping::identity() : clock->second, ref.source_start_ms);
    asset.duration_ms = ref.duration_ms;
    const fs::path path = resolve(base, ref.path);
    asset.path = staged("media", path.string(), [&] { return store_->import_media(s.session_id, asset.media_id, path); });
    lo = std::min(lo, asset.master_start_ms);
    hi = std::max(hi, asset.master_start_ms + asset.duration_ms);
    s.media.push_back(std::move(asset));
  }
  s.span_start_ms = lo;
  s.span_end_ms = hi;

  s.derived = staged("analytics", manifest_path.string(), [&] { return compute_derived(s, config_); });
  staged("store", manifest_path.string(), [&] { return store_->put_session(s, std::nullopt); });
  staged("store", manifest_path.string(), [&] {
    store_->record_anonymization(anon);
    return 0;
  });
  return s.session_id;
}

std::int64_t Service::relabel(const RelabelRequest& req) {
  auto snap = store_->get(req.session_id);
  Session& s = snap.session;
  if (req.base_version != s.activities_version)
    throw Error(ErrorCode::VersionConflict, "activities changed: base_version " + std::to_string(req.base_version) +
                                                ", current " + std::to_string(s.activities_version));
  analytics::check_activities(req.activities);
  for (const auto& a : req.activities) {
    if (a.start_ms < s.span_start_ms || a.end_ms > s.span_end_ms)
      throw Error(ErrorCode::OutOfBounds, "activity '" + a.name + "' lies outside the session span [" +
                                              std::to_string(s.span_start_ms) + ", " + std::to_string(s.span_end_ms) +
                                              ")");
  }

  s.activities = req.activities;
  s.activities_version += 1;
  s.derived = compute_derived(s, config_);
  try {
    store_->put_session(s, snap.token);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::StaleWrite) throw Error(ErrorCode::VersionConflict, e.what());
    throw;
  }
  return s.activities_version;
}

json Service::list_sessions() const {
  json out = json::array();
  for (const auto& s : store_->list_sessions()) {
    out.push_back({{"session_id", s.session_id},
                   {"activities_version", s.activities_version},
                   {"streams", s.stream_count},
                   {"activities", s.activity_count},
                   {"media", s.media_count}});
  }
  return {{"sessions", out}};
}

json Service::get_session(const std::string& id) const {
  Session s = store_->get_session(id);
  json streams = json::array();
  for (std::size_t i = 0; i < s.streams.size(); ++i) {
    const auto& st = s.streams[i];
    json j = {{"modality", to_string(st.modality)}, {"source_id", st.source_id}, {"n", st.samples.size()},
              {"start_ms", st.samples.front().t_ms}, {"end_ms", st.samples.back().t_ms}};
    if (i < s.cleaning.size()) j["cleaning"] = to_json(s.cleaning[i]);
    streams.push_back(std::move(j));
  }
  return {{"session_id", s.session_id},
          {"session_start_ms", s.session_start_ms},
          {"span_start_ms", s.span_start_ms},
          {"span_end_ms", s.span_end_ms},
          {"activities_version", s.activities_version},
          {"activities", to_json(s.activities)},
          {"streams", std::move(streams)},
          {"media_count", s.media.size()},
          {"has_tests", s.tests.has_value()},
          {"demographics", s.demographics}};
}

json Service::get_activities(const std::string& id) const {
  Session s = store_->get_session(id);
  return {{"session_id", s.session_id},
          {"activities_version", s.activities_version},
          {"span_start_ms", s.span_start_ms},
          {"span_end_ms", s.span_end_ms},
          {"activities", to_json(s.activities)}};
}

json Service::get_stream(const std::string& id, Modality modality, const std::string& source_id,
                         std::optional<std::int64_t> smooth_window_ms,
                         const std::optional<std::string>& activity) const {
  Session s = store_->get_session(id);
  const SignalStream* stream = s.find_stream(modality, source_id);
  if (stream == nullptr)
    throw Error(ErrorCode::NotFound, "no stream " + std::string(to_string(modality)) + "/" + source_id);

  std::vector<Sample> samples =
      smooth_window_ms ? analytics::smooth_sliding_window(*stream, *smooth_window_ms) : stream->samples;

  if (activity) {
    if (*activity != kUnassigned) find_activity(s, *activity);
    auto labeled = analytics::segment_by_activity(*stream, s.activities);
    std::vector<Sample> kept;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (labeled.label_name(i) == *activity) kept.push_back(samples[i]);
    samples = std::move(kept);
  }

  json data = json::array();
  for (const auto& x : samples) data.push_back(to_json(x));
  return {{"session_id", s.session_id},
          {"modality", to_string(modality)},
          {"source_id", source_id},
          {"activities_version", s.activities_version},
          {"smooth_window_ms", smooth_window_ms ? json(*smooth_window_ms) : json(nullptr)},
          {"activity", activity ? json(*activity) : json(nullptr)},
          {"samples", std::move(data)},
          {"activities", to_json(analytics::sorted_by_start(s.activities))}};
}

json Service::get_analytics(const std::string& id, std::string_view kind, const Params& params) const {
  Session s = store_->get_session(id);
  const bool cached = cache_valid(s);
  json result;

  if (kind == "activity_stats") {
    allow_params(params, {"modality", "source_id"});
    result = cached ? s.derived->at("activity_stats") : stats_payload(s);
    if (params.count("modality") || params.count("source_id")) {
      json filtered = json::array();
      for (const auto& e : result) {
        if (params.count("modality") && e["modality"] != params.at("modality")) continue;
        if (params.count("source_id") && e["source_id"] != params.at("source_id")) continue;
        filtered.push_back(e);
      }
      result = std::move(filtered);
    }
  } else if (kind == "correlations") {
    allow_params(params, {"step_ms", "activity"});
    const std::int64_t step = param_int(params, "step_ms", config_.correlation_step_ms);
    if (step <= 0) throw Error(ErrorCode::BadParams, "step_ms must be > 0");
    const ActivityInterval* within = nullptr;
    if (auto it = params.find("activity"); it != params.end()) within = &find_activity(s, it->second);
    if (cached && within == nullptr && step == s.derived->at("correlation_step_ms").get<std::int64_t>())
      result = s.derived->at("correlations");
    else
      result = correlations_payload(s, step, within);
  } else if (kind == "extrema") {
    allow_params(params, {"prominence_frac", "window_ms", "modality", "source_id"});
    const double frac = param_real(params, "prominence_frac", config_.prominence_frac);
    const std::int64_t window = param_int(params, "window_ms", config_.window_ms);
    if (!(frac > 0.0 && frac <= 1.0)) throw Error(ErrorCode::BadParams, "prominence_frac must lie in (0, 1]");
    if (window < 0) throw Error(ErrorCode::BadParams, "window_ms must be >= 0");
    if (cached && frac == s.derived->at("prominence_frac").get<double>() &&
        window == s.derived->at("window_ms").get<std::int64_t>())
      result = s.derived->at("extrema");
    else
      result = extrema_payload(s, window, frac);
    if (params.count("modality") || params.count("source_id")) {
      json filtered = json::array();
      for (const auto& e : result) {
        if (params.count("modality") && e["modality"] != params.at("modality")) continue;
        if (params.count("source_id") && e["source_id"] != params.at("source_id")) continue;
        filtered.push_back(e);
      }
      result = std::move(filtered);
    }
  } else if (kind == "ranking") {
    allow_params(params, {"modality", "source_id"});
    const Modality modality = param_modality(params);
    auto src = params.find("source_id");
    if (src == params.end()) throw Error(ErrorCode::BadParams, "parameter 'source_id' is required");
    std::vector<analytics::ActivityStats> stats;
    for (const auto& stream : s.streams)
      if (stream.modality == modality && stream.source_id == src->second)
        stats = analytics::activity_stats(analytics::segment_by_activity(stream, s.activities));
    json ranking = json::array();
    for (const auto& e : analytics::rank_activities(stats, modality, src->second))
      ranking.push_back({{"activity_name", e.activity_name}, {"mean", e.mean}});
    result = {{"modality", to_string(modality)}, {"source_id", src->second}, {"ranking", std::move(ranking)}};
  } else if (kind == "test_comparison") {
    allow_params(params, {});
    if (!s.tests) throw Error(ErrorCode::NotFound, "session has no pretest/posttest results");
    result = to_json(analytics::compare_tests(s.tests->pre, s.tests->post));
  } else {
    throw Error(ErrorCode::BadParams, "unknown analytics kind '" + std::string(kind) + "'");
  }

  return {{"session_id", s.session_id},
          {"kind", kind},
          {"activities_version", s.activities_version},
          {"result", std::move(result)}};
}

json Service::get_media_manifest(const std::string& id) const {
  Session s = store_->get_session(id);
  json assets = json::array();
  for (const auto& m : s.media) {
    assets.push_back({{"media_id", m.media_id},
                      {"kind", to_string(m.kind)},
                      {"url", "/media/" + s.session_id + "/" + m.media_id},
                      {"master_start_ms", m.master_start_ms},
                      {"duration_ms", m.duration_ms}});
  }
  return {{"session_id", s.session_id}, {"activities_version", s.activities_version}, {"assets", std::move(assets)}};
}

std::string Service::export_session(const std::string& id) const { return canonical(to_json(store_->get_session(id))); }

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::NoSuchModality:
    case ErrorCode::UnknownActivity:
      return 404;
    case ErrorCode::VersionConflict:
    case ErrorCode::StaleWrite:
      return 409;
    case ErrorCode::OverlappingActivities:
    case ErrorCode::OutOfBounds:
    case ErrorCode::InvalidRecord:
    case ErrorCode::MismatchedScales:
      return 422;
    case ErrorCode::StorageFailure:
      return 500;
    default:
      return 400;
  }
}

}  // namespace mmla::service

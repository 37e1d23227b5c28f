#include "mmla/session.hpp"

#include "mmla/error.hpp"

namespace mmla {

using nlohmann::json;

const SignalStream* Session::find_stream(Modality m, std::string_view source_id) const {
  for (const auto& s : streams)
    if (s.modality == m && s.source_id == source_id) return &s;
  return nullptr;
}

json to_json(const Sample& s) { return json::array({s.t_ms, s.value}); }

json to_json(const ActivityInterval& a) {
  return {{"name", a.name}, {"start_ms", a.start_ms}, {"end_ms", a.end_ms}};
}

json to_json(const std::vector<ActivityInterval>& acts) {
  json arr = json::array();
  for (const auto& a : acts) arr.push_back(to_json(a));
  return arr;
}

json to_json(const CleaningReport& r) {
  return {{"input", r.input},
          {"non_finite", r.non_finite},
          {"out_of_range", r.out_of_range},
          {"duplicate_timestamp", r.duplicate_timestamp},
          {"reordered", r.reordered}};
}

json to_json(const TestResult& t) {
  json j = {{"kind", to_string(t.kind)}, {"score", t.score}, {"max_score", t.max_score}};
  if (t.per_item) j["per_item"] = *t.per_item;
  return j;
}

json to_json(const MediaAsset& m) {
  return {{"media_id", m.media_id},
          {"kind", to_string(m.kind)},
          {"path", m.path},
          {"master_start_ms", m.master_start_ms},
          {"duration_ms", m.duration_ms}};
}

json to_json(const analytics::ActivityStats& s) {
  return {{"activity_name", s.activity_name},
          {"modality", to_string(s.modality)},
          {"source_id", s.source_id},
          {"n", s.n},
          {"mean", s.mean},
          {"min", s.min},
          {"max", s.max},
          {"stddev", s.stddev}};
}

json to_json(const analytics::CorrelationMatrix& m) {
  json labels = json::array();
  for (const auto& l : m.labels) labels.push_back({{"modality", to_string(l.modality)}, {"source_id", l.source_id}});
  json r = json::array();
  for (const auto& row : m.r) {
    json jr = json::array();
    for (const auto& v : row) jr.push_back(v ? json(*v) : json(nullptr));
    r.push_back(std::move(jr));
  }
  return {{"labels", labels}, {"r", r}, {"n_common", m.n_common}};
}

json to_json(const analytics::ExtremumEvent& e) {
  return {{"kind", e.kind == analytics::ExtremumKind::Peak ? "peak" : "trough"},
          {"t_ms", e.t_ms},
          {"value", e.value},
          {"prominence", e.prominence},
          {"activity_name", e.activity_name}};
}

json to_json(const analytics::TestComparison& c) {
  return {{"pre_score", c.pre_score},
          {"post_score", c.post_score},
          {"max_score", c.max_score},
          {"delta", c.delta},
          {"relative_gain", c.relative_gain ? json(*c.relative_gain) : json(nullptr)}};
}

json to_json(const Session& s) {
  json streams = json::array();
  for (std::size_t i = 0; i < s.streams.size(); ++i) {
    const auto& st = s.streams[i];
    json samples = json::array();
    for (const auto& x : st.samples) samples.push_back(to_json(x));
    json js = {{"modality", to_string(st.modality)},
               {"source_id", st.source_id},
               {"cleaned", st.cleaned},
               {"samples", std::move(samples)}};
    if (i < s.cleaning.size()) js["cleaning"] = to_json(s.cleaning[i]);
    streams.push_back(std::move(js));
  }
  json media = json::array();
  for (const auto& m : s.media) media.push_back(to_json(m));

  json j = {{"session_id", s.session_id},
            {"session_start_ms", s.session_start_ms},
            {"span_start_ms", s.span_start_ms},
            {"span_end_ms", s.span_end_ms},
            {"streams", std::move(streams)},
            {"activities", to_json(s.activities)},
            {"activities_version", s.activities_version},
            {"media", std::move(media)},
            {"demographics", s.demographics},
            {"tests", nullptr},
            {"derived", s.derived ? *s.derived : json(nullptr)}};
  if (s.tests) j["tests"] = {{"pre", to_json(s.tests->pre)}, {"post", to_json(s.tests->post)}};
  return j;
}

namespace {

TestResult test_from_json(const json& j) {
  TestResult t;
  t.kind = j.at("kind").get<std::string>() == "pretest" ? TestKind::Pretest : TestKind::Posttest;
  t.score = j.at("score").get<double>();
  t.max_score = j.at("max_score").get<double>();
  if (j.contains("per_item")) t.per_item = j.at("per_item").get<std::vector<double>>();
  return t;
}

}  // namespace

std::vector<ActivityInterval> activities_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::BadParams, "activities must be an array");
  std::vector<ActivityInterval> out;
  for (const auto& a : j) {
    if (!a.is_object() || !a.contains("name") || !a["name"].is_string() || !a.contains("start_ms") ||
        !a["start_ms"].is_number_integer() || !a.contains("end_ms") || !a["end_ms"].is_number_integer())
      throw Error(ErrorCode::BadParams, "each activity needs string name and integer start_ms/end_ms");
    out.push_back({a["name"].get<std::string>(), a["start_ms"].get<std::int64_t>(), a["end_ms"].get<std::int64_t>()});
  }
  return out;
}

Session session_from_json(const json& j) {
  try {
    Session s;
    s.session_id = j.at("session_id").get<std::string>();
    s.session_start_ms = j.at("session_start_ms").get<std::int64_t>();
    s.span_start_ms = j.at("span_start_ms").get<std::int64_t>();
    s.span_end_ms = j.at("span_end_ms").get<std::int64_t>();
    for (const auto& js : j.at("streams")) {
      SignalStream st;
      auto mod = parse_modality(js.at("modality").get<std::string>());
      if (!mod) throw Error(ErrorCode::StorageFailure, "unknown modality in stored session");
      st.modality = *mod;
      st.source_id = js.at("source_id").get<std::string>();
      st.cleaned = js.at("cleaned").get<bool>();
      for (const auto& x : js.at("samples")) st.samples.push_back({x.at(0).get<std::int64_t>(), x.at(1).get<double>()});
      s.streams.push_back(std::move(st));
      if (js.contains("cleaning")) {
        const auto& c = js["cleaning"];
        s.cleaning.push_back({c.at("input").get<std::size_t>(), c.at("non_finite").get<std::size_t>(),
                              c.at("out_of_range").get<std::size_t>(),
                              c.at("duplicate_timestamp").get<std::size_t>(), c.at("reordered").get<std::size_t>()});
      }
    }
    s.activities = activities_from_json(j.at("activities"));
    s.activities_version = j.at("activities_version").get<std::int64_t>();
    for (const auto& m : j.at("media")) {
      MediaAsset a;
      a.media_id = m.at("media_id").get<std::string>();
      auto kind = parse_media_kind(m.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::StorageFailure, "unknown media kind in stored session");
      a.kind = *kind;
      a.path = m.at("path").get<std::string>();
      a.master_start_ms = m.at("master_start_ms").get<std::int64_t>();
      a.duration_ms = m.at("duration_ms").get<std::int64_t>();
      s.media.push_back(std::move(a));
    }
    s.demographics = j.at("demographics").get<std::map<std::string, std::string>>();
    if (const auto& t = j.at("tests"); !t.is_null()) s.tests = TestPair{test_from_json(t.at("pre")), test_from_json(t.at("post"))};
    if (const auto& d = j.at("derived"); !d.is_null()) s.derived = d;
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StorageFailure, std::string("stored session document is corrupt: ") + e.what());
  }
}

std::string canonical(const json& j) { return j.dump() + "\n"; }

}  // namespace mmla

#include "mmla/ingest.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "mmla/error.hpp"

namespace mmla::ingest {

using nlohmann::json;

namespace {

// Splits on '\n', stripping one trailing '\r' per line. A final empty line
// produced by a trailing newline is dropped.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  if (s.empty() || s.front() == '+') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, std::chars_format::general);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// ---------------------------------------------------------------------------
// Manifest

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvalidManifest, path + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) invalid(path + "." + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) invalid(path + "." + key, "missing required key");
  return *it;
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) invalid(path, "expected string");
  return v.get<std::string>();
}

std::int64_t get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) invalid(path, "expected integer");
  return v.get<std::int64_t>();
}

double get_real(const json& v, const std::string& path) {
  if (!v.is_number()) invalid(path, "expected number");
  return v.get<double>();
}

ClockSpec parse_clock(const json& v, const std::string& path) {
  if (v.is_object()) {
    reject_unknown_keys(v, path, {"scale", "offset_ms"});
    ClockMapping m{get_real(require(v, path, "scale"), path + ".scale"),
                   get_real(require(v, path, "offset_ms"), path + ".offset_ms")};
    if (!(m.scale > 0.0) || !std::isfinite(m.scale)) invalid(path + ".scale", "must be > 0");
    if (!std::isfinite(m.offset_ms)) invalid(path + ".offset_ms", "must be finite");
    return m;
  }
  if (v.is_array()) {
    if (v.empty()) invalid(path, "marker list must not be empty");
    std::vector<MarkerPair> markers;
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::string p = path + "[" + std::to_string(i) + "]";
      if (!v[i].is_array() || v[i].size() != 2) invalid(p, "expected [t_source_ms, t_master_ms]");
      markers.emplace_back(get_int(v[i][0], p + "[0]"), get_int(v[i][1], p + "[1]"));
    }
    return markers;
  }
  invalid(path, "expected {scale, offset_ms} object or marker-pair list");
}

}  // namespace

SessionManifest parse_manifest(std::string_view text) {
  json root = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) throw Error(ErrorCode::MalformedManifest, "manifest is not valid JSON");
  if (!root.is_object()) throw Error(ErrorCode::MalformedManifest, "manifest root must be an object");

  const std::string r = "$";
  reject_unknown_keys(root, r,
                      {"learner_ref", "session_start_ms", "signal_files", "activity_file",
                       "media_files", "test_files", "demographics"});

  SessionManifest m;
  m.learner_ref = get_string(require(root, r, "learner_ref"), "$.learner_ref");
  m.session_start_ms = get_int(require(root, r, "session_start_ms"), "$.session_start_ms");
  if (m.session_start_ms <= 0) invalid("$.session_start_ms", "must be > 0");
  m.activity_file = get_string(require(root, r, "activity_file"), "$.activity_file");

  const json& signals = require(root, r, "signal_files");
  if (!signals.is_array()) invalid("$.signal_files", "expected array");
  std::set<std::pair<Modality, std::string>> seen;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    const std::string p = "$.signal_files[" + std::to_string(i) + "]";
    const json& s = signals[i];
    if (!s.is_object()) invalid(p, "expected object");
    reject_unknown_keys(s, p, {"path", "modality", "source_id", "clock"});
    SignalFileRef ref;
    ref.path = get_string(require(s, p, "path"), p + ".path");
    std::string modality = get_string(require(s, p, "modality"), p + ".modality");
    auto mod = parse_modality(modality);
    if (!mod) invalid(p + ".modality", "unknown modality '" + modality + "'");
    ref.modality = *mod;
    ref.source_id = get_string(require(s, p, "source_id"), p + ".source_id");
    if (ref.source_id.empty()) invalid(p + ".source_id", "must not be empty");
    if (auto c = s.find("clock"); c != s.end() && !c->is_null()) ref.clock = parse_clock(*c, p + ".clock");
    if (!seen.emplace(ref.modality, ref.source_id).second)
      invalid(p, "duplicate (modality, source_id) pair (" + modality + ", " + ref.source_id + ")");
    m.signal_files.push_back(std::move(ref));
  }

  if (auto it = root.find("media_files"); it != root.end()) {
    if (!it->is_array()) invalid("$.media_files", "expected array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = "$.media_files[" + std::to_string(i) + "]";
      const json& f = (*it)[i];
      if (!f.is_object()) invalid(p, "expected object");
      reject_unknown_keys(f, p, {"path", "kind", "source_start_ms", "duration_ms", "source_id"});
      MediaFileRef ref;
      ref.path = get_string(require(f, p, "path"), p + ".path");
      std::string kind = get_string(require(f, p, "kind"), p + ".kind");
      auto k = parse_media_kind(kind);
      if (!k) invalid(p + ".kind", "unknown media kind '" + kind + "'");
      ref.kind = *k;
      ref.source_start_ms = get_int(require(f, p, "source_start_ms"), p + ".source_start_ms");
      ref.duration_ms = get_int(require(f, p, "duration_ms"), p + ".duration_ms");
      if (ref.duration_ms <= 0) invalid(p + ".duration_ms", "must be > 0");
      ref.source_id = get_string(require(f, p, "source_id"), p + ".source_id");
      m.media_files.push_back(std::move(ref));
    }
  }

  if (auto it = root.find("test_files"); it != root.end() && !it->is_null()) {
    if (!it->is_object()) invalid("$.test_files", "expected object");
    reject_unknown_keys(*it, "$.test_files", {"pretest", "posttest"});
    m.test_files = TestFiles{get_string(require(*it, "$.test_files", "pretest"), "$.test_files.pretest"),
                             get_string(require(*it, "$.test_files", "posttest"), "$.test_files.posttest")};
  }

  if (auto it = root.find("demographics"); it != root.end()) {
    if (!it->is_object()) invalid("$.demographics", "expected object");
    for (const auto& [key, value] : it->items())
      m.demographics[key] = get_string(value, "$.demographics." + key);
  }
  return m;
}

json manifest_to_json(const SessionManifest& m) {
  json signals = json::array();
  for (const auto& s : m.signal_files) {
    json j = {{"path", s.path}, {"modality", to_string(s.modality)}, {"source_id", s.source_id}};
    if (const auto* c = std::get_if<ClockMapping>(&s.clock)) {
      j["clock"] = {{"scale", c->scale}, {"offset_ms", c->offset_ms}};
    } else if (const auto* mk = std::get_if<std::vector<MarkerPair>>(&s.clock)) {
      json pairs = json::array();
      for (const auto& [src, master] : *mk) pairs.push_back({src, master});
      j["clock"] = pairs;
    }
    signals.push_back(std::move(j));
  }
  json media = json::array();
  for (const auto& f : m.media_files) {
    media.push_back({{"path", f.path},
                     {"kind", to_string(f.kind)},
                     {"source_start_ms", f.source_start_ms},
                     {"duration_ms", f.duration_ms},
                     {"source_id", f.source_id}});
  }
  json j = {{"learner_ref", m.learner_ref},
            {"session_start_ms", m.session_start_ms},
            {"signal_files", signals},
            {"activity_file", m.activity_file},
            {"media_files", media},
            {"demographics", m.demographics}};
  if (m.test_files) j["test_files"] = {{"pretest", m.test_files->pretest}, {"posttest", m.test_files->posttest}};
  return j;
}

// ---------------------------------------------------------------------------
// Signal CSV

std::vector<RawSample> parse_signal_file(std::string_view text, Modality /*modality*/) {
  auto lines = split_lines(text);
  if (lines.empty()) throw Error(ErrorCode::EmptyFile, "signal file is empty");
  if (lines[0] != "timestamp_ms,value")
    throw Error(ErrorCode::MalformedRow, "row 1: header must be exactly 'timestamp_ms,value'");

  std::vector<RawSample> samples;
  samples.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    std::size_t comma = line.find(',');
    RawSample s;
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos ||
        !parse_int(line.substr(0, comma), s.t_source_ms) || !parse_real(line.substr(comma + 1), s.value)) {
      throw Error(ErrorCode::MalformedRow,
                  "row " + std::to_string(i + 1) + ": expected '<int>,<float>', got '" + std::string(line) + "'");
    }
    samples.push_back(s);
  }
  if (samples.empty()) throw Error(ErrorCode::EmptyFile, "signal file has a header but no data rows");
  return samples;
}

// ---------------------------------------------------------------------------
// Activity JSONL

std::vector<RawActivityRecord> parse_activity_log(std::string_view text) {
  auto lines = split_lines(text);
  std::vector<RawActivityRecord> records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string row = "row " + std::to_string(i + 1);
    json j = json::parse(lines[i], nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw Error(ErrorCode::MalformedRow, row + ": expected one JSON object per line");
    if (j.size() != 3 || !j.contains("name") || !j.contains("start_ms") || !j.contains("end_ms"))
      throw Error(ErrorCode::MalformedRow, row + ": object must have exactly keys name, start_ms, end_ms");
    if (!j["name"].is_string() || !j["start_ms"].is_number_integer() || !j["end_ms"].is_number_integer())
      throw Error(ErrorCode::MalformedRow, row + ": name must be a string, start_ms/end_ms integers");
    RawActivityRecord r{j["name"].get<std::string>(), j["start_ms"].get<std::int64_t>(),
                        j["end_ms"].get<std::int64_t>()};
    if (r.name.empty()) throw Error(ErrorCode::InvalidRecord, row + ": name must not be empty");
    if (r.start_ms >= r.end_ms) throw Error(ErrorCode::InvalidRecord, row + ": start_ms must be < end_ms");
    records.push_back(std::move(r));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Test JSON

TestResult parse_test_file(std::string_view text, TestKind kind) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::MalformedTest, "test file is not a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "score" && key != "max_score" && key != "per_item")
      throw Error(ErrorCode::MalformedTest, "unknown key '" + key + "'");
  if (!j.contains("score") || !j["score"].is_number() || !j.contains("max_score") || !j["max_score"].is_number())
    throw Error(ErrorCode::MalformedTest, "score and max_score must be numbers");

  TestResult t{kind, j["score"].get<double>(), j["max_score"].get<double>(), std::nullopt};
  if (auto it = j.find("per_item"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::MalformedTest, "per_item must be an array");
    std::vector<double> items;
    for (const auto& v : *it) {
      if (!v.is_number()) throw Error(ErrorCode::MalformedTest, "per_item entries must be numbers");
      items.push_back(v.get<double>());
    }
    t.per_item = std::move(items);
  }

  if (!std::isfinite(t.max_score) || !(t.max_score > 0.0)) throw Error(ErrorCode::InvalidTest, "max_score must be > 0");
  if (!std::isfinite(t.score) || t.score < 0.0 || t.score > t.max_score)
    throw Error(ErrorCode::InvalidTest, "score must lie in [0, max_score]");
  if (t.per_item) {
    double total = 0.0;
    for (double v : *t.per_item) total += v;
    if (std::abs(total - t.score) > 1e-9)
      throw Error(ErrorCode::InvalidTest, "per_item entries must sum to score");
  }
  return t;
}

}  // namespace mmla::ingest

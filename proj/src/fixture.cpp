#include "mmla/fixture.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "mmla/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mmla::fixture {
namespace {

constexpr std::int64_t kSessionEndMs = 620000;  // data runs 20 s past the last activity

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
  out << text;
}

std::string real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Row {
  std::int64_t t_source;
  double value;
};

std::string csv(const std::vector<Row>& rows) {
  std::string out = "timestamp_ms,value\n";
  for (const auto& r : rows) out += std::to_string(r.t_source) + "," + real(r.value) + "\n";
  return out;
}

// Activity-dependent level so per-activity statistics differ.
double level(const std::vector<ActivityInterval>& acts, std::int64_t t, const std::vector<double>& per_activity,
             double fallback) {
  for (std::size_t i = 0; i < acts.size(); ++i)
    if (acts[i].contains(t)) return per_activity[i];
  return fallback;
}

}  // namespace

DemoInfo write_demo(const fs::path& dir, std::uint64_t seed, const std::string& learner_ref) {
  fs::create_directories(dir / "signals");
  fs::create_directories(dir / "media");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  DemoInfo info;
  info.learner_ref = learner_ref;
  info.activities = {{"instructions", 0, 60000},
                     {"video_1", 60000, 240000},
                     {"quiz_1", 240000, 330000},
                     {"video_2", 330000, 480000},
                     {"assignment", 480000, 600000}};
  const auto& acts = info.activities;

  // Activity log on the master clock.
  std::string jsonl;
  for (const auto& a : acts)
    jsonl += json{{"name", a.name}, {"start_ms", a.start_ms}, {"end_ms", a.end_ms}}.dump() + "\n";
  write_file(dir / "activities.jsonl", jsonl);

  json signal_files = json::array();

  // EEG band: device clock runs 1,000,000 ms ahead of master; 1 Hz.
  const double eeg_offset = -1000000.0;
  struct Band {
    const char* modality;
    std::vector<double> levels;
    double fallback;
    double amplitude;
  };
  const std::vector<Band> bands = {
      {"attention", {45, 55, 72, 50, 65}, 40, 6},
      {"meditation", {60, 50, 35, 52, 40}, 55, 5},
      {"wave_delta", {900, 800, 650, 820, 700}, 850, 60},
      {"wave_theta", {400, 380, 300, 390, 330}, 390, 30},
      {"wave_alpha", {250, 220, 160, 230, 180}, 240, 20},
      {"wave_beta", {120, 140, 190, 135, 170}, 125, 12},
      {"wave_gamma", {40, 45, 70, 44, 60}, 42, 5},
  };
  for (const auto& band : bands) {
    std::vector<Row> rows;
    for (std::int64_t t = 0; t < kSessionEndMs; t += 1000) {
      double v = level(acts, t, band.levels, band.fallback) +
                 band.amplitude * std::sin(2.0 * M_PI * static_cast<double>(t) / 45000.0) +
                 0.5 * band.amplitude * noise(rng);
      if (std::string_view(band.modality) == "attention" || std::string_view(band.modality) == "meditation")
        v = std::clamp(v, 0.0, 100.0);
      else
        v = std::max(v, 0.0);
      rows.push_back({t - static_cast<std::int64_t>(eeg_offset), std::round(v * 100.0) / 100.0});
    }
    if (std::string_view(band.modality) == "attention") {
      rows[100].value = 250.0;                   // sensor glitch, out of range
      std::swap(rows[200], rows[201]);           // out-of-order pair
      const Row dup = rows[300];
      rows.insert(rows.begin() + 300, dup);  // duplicated row
    }
    const std::string file = std::string("signals/") + band.modality + ".csv";
    write_file(dir / file, csv(rows));
    signal_files.push_back({{"path", file},
                            {"modality", band.modality},
                            {"source_id", "eeg_band"},
                            {"clock", {{"scale", 1.0}, {"offset_ms", eeg_offset}}}});
  }

  // Smartwatch heart rate: clock drifts (+100 ppm) and starts 500 ms late;
  // reconciled from two sync markers.
  {
    const std::vector<double> levels = {72, 70, 84, 71, 80};
    std::vector<Row> rows;
    for (std::int64_t ts = 0; ts < kSessionEndMs; ts += 1000) {
      const auto t_master = static_cast<std::int64_t>(std::llround(1.0001 * static_cast<double>(ts) + 500.0));
      double v = level(acts, t_master, levels, 70) + 2.0 * noise(rng);
      rows.push_back({ts, std::round(v * 10.0) / 10.0});
    }
    write_file(dir / "signals/heart_rate.csv", csv(rows));
    signal_files.push_back({{"path", "signals/heart_rate.csv"},
                            {"modality", "heart_rate"},
                            {"source_id", "watch_L"},
                            {"clock", json::array({json::array({0, 500}), json::array({600000, 600560})})}});
  }

  // Eye tracker pupil diameter at 4 Hz, 5 s behind master; one blink (0 mm).
  {
    const std::vector<double> levels = {3.4, 3.6, 4.3, 3.7, 4.0};
    std::vector<Row> rows;
    for (std::int64_t t = 0; t < kSessionEndMs; t += 250) {
      double v = level(acts, t, levels, 3.5) + 0.3 * std::sin(2.0 * M_PI * static_cast<double>(t) / 60000.0) +
                 0.05 * noise(rng);
      rows.push_back({t + 5000, std::round(v * 1000.0) / 1000.0});
    }
    rows[1000].value = 0.0;
    write_file(dir / "signals/pupil_diameter.csv", csv(rows));
    signal_files.push_back({{"path", "signals/pupil_diameter.csv"},
                            {"modality", "pupil_diameter"},
                            {"source_id", "eye_tracker"},
                            {"clock", json::array({json::array({5000, 0})})}});
  }

  // Opaque media files; the engine never decodes them.
  json media_files = json::array();
  const struct {
    const char* kind;
    const char* source;
    std::int64_t start;
  } media[] = {{"screen", "screen_rec", 0},
               {"webcam_front", "webcam_front", 1000},
               {"webcam_side", "webcam_side", 1500},
               {"fixation_overlay", "eye_tracker", 5000}};
  for (const auto& m : media) {
    std::string bytes(4096, '\0');
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = static_cast<char>((i * 31 + std::string_view(m.kind).size()) & 0xFF);
    const std::string file = std::string("media/") + m.kind + ".mp4";
    write_file(dir / file, bytes);
    media_files.push_back({{"path", file},
                           {"kind", m.kind},
                           {"source_start_ms", m.start},
                           {"duration_ms", 600000},
                           {"source_id", m.source}});
  }

  write_file(dir / "pretest.json", json{{"score", 40}, {"max_score", 100}, {"per_item", {10, 10, 20}}}.dump() + "\n");
  write_file(dir / "posttest.json", json{{"score", 70}, {"max_score", 100}}.dump() + "\n");

  json manifest = {{"learner_ref", learner_ref},
                   {"session_start_ms", 1700000000000},
                   {"signal_files", signal_files},
                   {"activity_file", "activities.jsonl"},
                   {"media_files", media_files},
                   {"test_files", {{"pretest", "pretest.json"}, {"posttest", "posttest.json"}}},
                   {"demographics", {{"age_band", "18-24"}, {"medical_notes", "none reported"}}}};
  info.manifest = dir / "manifest.json";
  write_file(info.manifest, manifest.dump(2) + "\n");

  info.stream_count = signal_files.size();
  info.activity_count = acts.size();
  info.media_count = media_files.size();
  return info;
}

}  // namespace mmla::fixture

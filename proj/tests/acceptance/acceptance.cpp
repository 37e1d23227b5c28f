// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
//   acceptance [--cli PATH] [--demo DIR]
//
// With --cli the end-to-end criterion drives the command-line tool on the
// bundled demo directory; otherwise it calls the service layer directly.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>

#include "mmla/analytics.hpp"
#include "mmla/error.hpp"
#include "mmla/fixture.hpp"
#include "mmla/http.hpp"
#include "mmla/service.hpp"
#include "mmla/store.hpp"
#include "mmla/timeline.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mmla;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(3);
  o << v;
  return o.str();
}

std::vector<Sample> random_stream(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> val(lo, hi);
  std::vector<Sample> s;
  std::int64_t t = static_cast<std::int64_t>(rng() % 100000);
  for (int i = 0; i < n; ++i) {
    s.push_back({t, val(rng)});
    t += 1 + static_cast<std::int64_t>(rng() % 4000);
  }
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------

Outcome smoothing_oracle() {
  Outcome out;
  std::mt19937_64 rng(1001);
  double worst = 0;
  double elapsed = 0;
  for (int k = 0; k < 100; ++k) {
    auto s = random_stream(rng, 1 + static_cast<int>(rng() % 1000), 0, 100);
    const auto t0 = Clock::now();
    auto got = analytics::smooth_sliding_window(s, 30000);
    elapsed += seconds_since(t0);
    auto want = oracle::smooth(s, 30000);
    if (got.size() != want.size()) {
      out.fail("length mismatch");
      continue;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (got[i].t_ms != s[i].t_ms) out.fail("timestamp mismatch");
      const double rel = want[i] == 0 ? std::abs(got[i].value) : std::abs(got[i].value - want[i]) / std::abs(want[i]);
      worst = std::max(worst, rel);
    }
  }
  if (worst > 1e-12) out.fail("max relative error " + fmt(worst));
  if (elapsed >= 5.0) out.fail("runtime " + fmt(elapsed) + " s");
  if (out.ok) out.detail = "max rel err " + fmt(worst) + ", smoothing time " + fmt(elapsed) + " s";
  return out;
}

Outcome correlation_oracle() {
  Outcome out;
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> alpha(0.001, 1000), beta(-1e4, 1e4);
  double worst = 0, worst_self = 0, worst_affine = 0;
  for (int k = 0; k < 50; ++k) {
    auto a = random_stream(rng, 50 + static_cast<int>(rng() % 500), 0, 100);
    auto b = random_stream(rng, 50 + static_cast<int>(rng() % 500), 0, 100);
    // Correlated component so r is not always near zero.
    for (auto& x : b) x.value += 0.7 * *oracle::interpolate(a, std::clamp(x.t_ms, a.front().t_ms, a.back().t_ms));
    SignalStream sa{Modality::Attention, "a", a, true}, sb{Modality::Meditation, "b", b, true};
    std::vector<SignalStream> pair = {sa, sb};
    auto m = analytics::correlate_streams(pair, 1000);

    // Direct Pearson on the same grid, built from the oracle interpolator.
    const std::int64_t lo = std::max(a.front().t_ms, b.front().t_ms);
    const std::int64_t hi = std::min(a.back().t_ms, b.back().t_ms);
    std::vector<double> x, y;
    for (std::int64_t t = lo; t <= hi; t += 1000) {
      x.push_back(*oracle::interpolate(a, t));
      y.push_back(*oracle::interpolate(b, t));
    }
    auto want = oracle::pearson(x, y);
    if (want.has_value() != m.r[0][1].has_value()) {
      out.fail("definedness mismatch on pair " + std::to_string(k));
      continue;
    }
    if (want) worst = std::max(worst, std::abs(*want - *m.r[0][1]));
    if (m.r[0][1] != m.r[1][0]) out.fail("matrix not symmetric");

    for (int d = 0; d < 2; ++d) {
      if (!m.r[d][d]) {
        out.fail("undefined diagonal");
        continue;
      }
      worst_self = std::max(worst_self, std::abs(*m.r[d][d] - 1.0));
    }
    std::vector<SignalStream> self = {sa, sa};
    auto ms = analytics::correlate_streams(self, 1000);
    worst_self = std::max(worst_self, std::abs(*ms.r[0][1] - 1.0));

    auto scaled = sb;
    const double al = alpha(rng), be = beta(rng);
    for (auto& s : scaled.samples) s.value = al * s.value + be;
    std::vector<SignalStream> moved = {sa, scaled};
    auto mm = analytics::correlate_streams(moved, 1000);
    if (m.r[0][1] && mm.r[0][1]) worst_affine = std::max(worst_affine, std::abs(*m.r[0][1] - *mm.r[0][1]));
  }
  if (worst > 1e-9) out.fail("direct Pearson diff " + fmt(worst));
  if (worst_self > 1e-12) out.fail("self-correlation diff " + fmt(worst_self));
  if (worst_affine > 1e-9) out.fail("affine diff " + fmt(worst_affine));
  if (out.ok)
    out.detail = "max diff " + fmt(worst) + ", self " + fmt(worst_self) + ", affine " + fmt(worst_affine);
  return out;
}

Outcome segmentation_partition() {
  Outcome out;
  std::mt19937_64 rng(1003);
  for (int k = 0; k < 1000 && out.ok; ++k) {
    const int m = static_cast<int>(rng() % 6);
    std::vector<std::int64_t> cuts;
    for (int i = 0; i < 2 * m; ++i) cuts.push_back(static_cast<std::int64_t>(rng() % 100000));
    std::sort(cuts.begin(), cuts.end());
    std::vector<ActivityInterval> acts;
    for (int i = 0; i < m; ++i)
      if (cuts[2 * i] < cuts[2 * i + 1]) acts.push_back({"act" + std::to_string(i % 3), cuts[2 * i], cuts[2 * i + 1]});
    std::shuffle(acts.begin(), acts.end(), rng);
    auto s = random_stream(rng, 1 + static_cast<int>(rng() % 300), 0, 100);
    for (auto& x : s) x.t_ms %= 110000;
    std::sort(s.begin(), s.end(), [](auto& a, auto& b) { return a.t_ms < b.t_ms; });
    s.erase(std::unique(s.begin(), s.end(), [](auto& a, auto& b) { return a.t_ms == b.t_ms; }), s.end());

    SignalStream st{Modality::Attention, "eeg", s, true};
    auto stats = analytics::activity_stats(analytics::segment_by_activity(st, acts));
    std::map<std::string, std::size_t> want;
    for (const auto& l : oracle::segment(s, acts)) ++want[l];
    std::size_t total = 0;
    std::map<std::string, std::size_t> got;
    for (const auto& e : stats) {
      got[e.activity_name] = e.n;
      total += e.n;
    }
    if (total != s.size()) out.fail("counts sum to " + std::to_string(total) + " of " + std::to_string(s.size()));
    if (got != want) out.fail("per-activity counts differ from scan in instance " + std::to_string(k));
  }
  if (out.ok) out.detail = "1000 instances";
  return out;
}

Outcome clock_alignment() {
  Outcome out;
  std::mt19937_64 rng(1004);
  double worst_two = 0, worst_resid = 0;
  for (int k = 0; k < 500; ++k) {
    // Two-point closed form.
    const std::int64_t s1 = static_cast<std::int64_t>(rng() % 10'000'000);
    const std::int64_t s2 = s1 + 1 + static_cast<std::int64_t>(rng() % 10'000'000);
    const std::int64_t m1 = static_cast<std::int64_t>(rng() % 100'000'000) - 50'000'000;
    const std::int64_t m2 = m1 + 1 + static_cast<std::int64_t>(rng() % 20'000'000);  // clocks run forward
    std::vector<MarkerPair> two = {{s1, m1}, {s2, m2}};
    auto c = timeline::estimate_clock_mapping(two);
    const long double scale = static_cast<long double>(m2 - m1) / static_cast<long double>(s2 - s1);
    const long double offset = m1 - scale * s1;
    worst_two = std::max<double>(worst_two, std::abs(c.scale - static_cast<double>(scale)) / std::max<long double>(1, std::abs(scale)));
    worst_two = std::max<double>(worst_two, std::abs(c.offset_ms - static_cast<double>(offset)) / std::max<long double>(1, std::abs(offset)));

    // Collinear k-point fixtures, k <= 10, exactly representable masters.
    const std::int64_t q = 10000;
    const std::int64_t p = q + static_cast<std::int64_t>(rng() % 201) - 100;
    const std::int64_t off = static_cast<std::int64_t>(rng() % 20'000'001) - 10'000'000;
    const int kpts = 2 + static_cast<int>(rng() % 9);
    std::vector<MarkerPair> pts;
    std::set<std::int64_t> used;
    while (static_cast<int>(pts.size()) < kpts) {
      const std::int64_t j = static_cast<std::int64_t>(rng() % 10000);
      if (!used.insert(j).second) continue;
      pts.emplace_back(j * q, j * p + off);
    }
    auto ck = timeline::estimate_clock_mapping(pts);
    for (const auto& [s, t] : pts)
      worst_resid = std::max<double>(worst_resid, std::abs(static_cast<long double>(ck.scale) * s + ck.offset_ms - t));
  }
  if (worst_two > 1e-9) out.fail("two-point deviation " + fmt(worst_two));
  if (worst_resid > 1e-6) out.fail("collinear residual " + fmt(worst_resid) + " ms");
  if (out.ok) out.detail = "two-point dev " + fmt(worst_two) + ", max residual " + fmt(worst_resid) + " ms";
  return out;
}

Outcome extrema_oracle() {
  Outcome out;
  std::mt19937_64 rng(1005);
  std::size_t events = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + rng() % 500;
    std::vector<Sample> s;
    const bool coarse = k % 2 == 0;  // coarse values produce plateaus and ties
    std::uniform_real_distribution<double> val(0, 100);
    std::int64_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back({t, coarse ? static_cast<double>(rng() % 10) : val(rng)});
      t += 1 + static_cast<std::int64_t>(rng() % 2000);
    }
    const double frac = k % 3 == 0 ? 0.1 : 0.05 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
    auto got = analytics::detect_extrema(s, {}, frac);
    auto want = oracle::extrema(s, frac);
    events += got.size();
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i)
      same = (got[i].kind == analytics::ExtremumKind::Peak) == want[i].peak && got[i].t_ms == want[i].t_ms;
    if (!same) out.fail("series " + std::to_string(k) + ": " + std::to_string(got.size()) + " events vs oracle " +
                        std::to_string(want.size()));
  }
  if (out.ok) out.detail = std::to_string(events) + " events matched";
  return out;
}

// Runs a shell command and returns (exit status, stdout).
std::pair<int, std::string> run(const std::string& cmd) {
  std::string output;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) return {-1, ""};
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) output.append(buf.data(), n);
  int status = ::pclose(p);
  return {status, output};
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome end_to_end(const std::string& cli, const fs::path& bundled, const fs::path& work) {
  Outcome out;
  fs::path demo = bundled;
  if (demo.empty() || !fs::exists(demo / "manifest.json")) {
    demo = work / "demo";
    fixture::write_demo(demo);
  }
  const fs::path root = work / "e2e-store";
  const auto t0 = Clock::now();

  std::string id;
  json analysis;
  if (!cli.empty()) {
    auto [st, text] = run(cli + " --store-root " + quote(root) + " ingest " + quote(demo / "manifest.json"));
    if (st != 0) {
      out.fail("ingest exited " + std::to_string(st));
      return out;
    }
    id = text.substr(0, text.find_first_of(" \n"));
    auto [st2, text2] = run(cli + " --store-root " + quote(root) + " analyze " + id);
    if (st2 != 0) {
      out.fail("analyze exited " + std::to_string(st2));
      return out;
    }
    analysis = json::parse(text2, nullptr, false);
    if (!analysis.is_discarded()) analysis = analysis.value("analytics", json::object());
  } else {
    service::Service svc(std::make_shared<store::FileStore>(root), Config{});
    id = svc.ingest_session(demo / "manifest.json");
    analysis = {{"test_comparison", svc.get_analytics(id, "test_comparison")["result"]}};
  }

  auto store = std::make_shared<store::FileStore>(root);
  service::Service svc(store, Config{});
  Session s = store->get_session(id);
  if (s.streams.size() != 9 || s.activities.size() != 5 || s.media.size() != 4)
    out.fail("counts " + std::to_string(s.streams.size()) + "/" + std::to_string(s.activities.size()) + "/" +
             std::to_string(s.media.size()));
  if (analysis.is_discarded() || !analysis.contains("test_comparison")) {
    out.fail("analyze output lacks test_comparison");
    return out;
  }
  const json tc = analysis["test_comparison"];
  if (tc["delta"] != 30.0) out.fail("delta " + tc["delta"].dump());
  if (tc["relative_gain"] != 0.5) out.fail("relative_gain " + tc["relative_gain"].dump());

  // Move the video_1 / quiz_1 boundary by +10 s.
  auto acts = s.activities;
  std::size_t vi = 0;
  while (vi < acts.size() && acts[vi].name != "video_1") ++vi;
  std::size_t qi = 0;
  while (qi < acts.size() && acts[qi].name != "quiz_1") ++qi;
  if (vi == acts.size() || qi == acts.size()) {
    out.fail("fixture activities missing");
    return out;
  }
  const std::int64_t b0 = acts[vi].end_ms, b1 = b0 + 10000;
  acts[vi].end_ms = b1;
  acts[qi].start_ms = b1;
  svc.relabel({id, s.activities_version, acts});

  auto stats_counts = [&](const json& result) {
    std::map<std::string, std::int64_t> c;
    for (const auto& e : result)
      c[e["modality"].get<std::string>() + "/" + e["source_id"].get<std::string>() + "/" +
        e["activity_name"].get<std::string>()] = e["n"].get<std::int64_t>();
    return c;
  };
  // Before-counts from the pre-edit session computed the same way the service does.
  json before = json::array();
  for (const auto& st : s.streams)
    for (const auto& e : analytics::activity_stats(analytics::segment_by_activity(st, s.activities)))
      before.push_back(to_json(e));
  auto c0 = stats_counts(before);
  auto c1 = stats_counts(svc.get_analytics(id, "activity_stats")["result"]);
  for (const auto& st : s.streams) {
    std::int64_t moved = 0;
    for (const auto& x : st.samples) moved += x.t_ms >= b0 && x.t_ms < b1;
    const std::string key = std::string(to_string(st.modality)) + "/" + st.source_id + "/";
    if (c1[key + "video_1"] - c0[key + "video_1"] != moved || c0[key + "quiz_1"] - c1[key + "quiz_1"] != moved)
      out.fail("count shift mismatch for " + key);
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 10.0) out.fail("runtime " + fmt(elapsed) + " s");
  if (out.ok)
    out.detail = std::string(cli.empty() ? "service" : "cli") + ", delta 30, gain 0.5, pipeline " + fmt(elapsed) + " s";
  return out;
}

Outcome persistence(const fs::path& work) {
  Outcome out;
  const fs::path dir = work / "demo-p";
  const std::string secret = "learner-ACCEPT-9137";
  auto info = fixture::write_demo(dir, 11, secret);
  const fs::path root = work / "p-store";
  std::string id;
  {
    auto store = std::make_shared<store::FileStore>(root);
    service::Service svc(store, Config{});
    id = svc.ingest_session(info.manifest);
    const Session s = store->get_session(id);
    // Round trip through a second store instance and a second put.
    auto again = std::make_shared<store::FileStore>(work / "p-store-2");
    again->put_session(s, std::nullopt);
    if (canonical(to_json(again->get_session(id))) != canonical(to_json(s))) out.fail("round trip differs");
    if (again->get_session(id) != s) out.fail("round trip not equal");

    // Stale token rejected, nothing changes.
    auto snap = store->get(id);
    Session edit = snap.session;
    edit.activities[0].name = "warmup";
    edit.activities_version += 1;
    store->put_session(edit, snap.token);
    const std::string doc = slurp(root / "sessions" / (id + ".json"));
    Session stale = snap.session;
    stale.activities[0].name = "other";
    stale.activities_version += 1;
    bool rejected = false;
    try {
      store->put_session(stale, snap.token);
    } catch (const Error& e) {
      rejected = e.code() == ErrorCode::StaleWrite;
    }
    if (!rejected) out.fail("stale write accepted");
    if (slurp(root / "sessions" / (id + ".json")) != doc) out.fail("stale write changed the document");
  }
  std::size_t hits = 0;
  for (const auto& e : fs::recursive_directory_iterator(work))
    if (e.is_regular_file() && e.path().string().find("store") != std::string::npos &&
        slurp(e.path()).find(secret) != std::string::npos)
      ++hits;
  if (hits != 0) out.fail(std::to_string(hits) + " persisted files contain the learner_ref");

  std::set<std::string> ids;
  for (int i = 0; i < 1000; ++i) ids.insert(store::random_session_id());
  if (ids.size() != 1000) out.fail("duplicate session ids");
  if (out.ok) out.detail = "round trip identical, 0 learner_ref hits, 1000 distinct ids, stale write rejected";
  return out;
}

Outcome api_contract(const fs::path& work) {
  Outcome out;
  auto info = fixture::write_demo(work / "demo-api");
  auto store = std::make_shared<store::FileStore>(work / "api-store");
  service::Service svc(store, Config{});
  const std::string id = svc.ingest_session(info.manifest);

  httplib::Server server;
  service::install_routes(server, svc);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client c("127.0.0.1", port);

  const std::string base = "/api/sessions/" + id;
  const std::vector<std::string> paths = {
      "/api/sessions",
      base,
      base + "/activities",
      base + "/media",
      base + "/streams/attention/eeg_band?smooth=30000",
      base + "/streams/heart_rate/watch_L?activity=quiz_1",
      base + "/analytics/activity_stats",
      base + "/analytics/correlations",
      base + "/analytics/extrema",
      base + "/analytics/ranking?modality=attention&source_id=eeg_band",
      base + "/analytics/test_comparison",
  };
  auto snapshot = [&] {
    std::vector<std::string> bodies;
    for (const auto& p : paths) {
      auto r = c.Get(p);
      bodies.push_back(r ? std::to_string(r->status) + " " + r->body : "no response");
    }
    return bodies;
  };
  const auto first = snapshot();
  for (std::size_t i = 0; i < first.size(); ++i)
    if (first[i].rfind("200 ", 0) != 0) out.fail(paths[i] + " -> " + first[i].substr(0, 60));
  if (snapshot() != first) out.fail("repeated GETs differ");

  // Rejected relabels: stale base, overlap, out of bounds.
  json acts = json::parse(c.Get(base + "/activities")->body)["activities"];
  json overlap = acts;
  overlap[0]["end_ms"] = overlap[1]["start_ms"].get<std::int64_t>() + 5000;
  json outside = acts;
  outside[4]["end_ms"] = 100'000'000;
  const std::vector<std::pair<json, int>> rejected = {
      {{{"base_version", 99}, {"activities", acts}}, 409},
      {{{"base_version", 1}, {"activities", overlap}}, 422},
      {{{"base_version", 1}, {"activities", outside}}, 422},
  };
  for (const auto& [body, status] : rejected) {
    auto r = c.Put(base + "/activities", body.dump(), "application/json");
    if (!r || r->status != status) out.fail("relabel expected " + std::to_string(status));
  }
  if (snapshot() != first) out.fail("rejected relabel changed a GET payload");

  // Analytics payloads equal direct analytics-module calls on the stored session.
  const Session s = store->get_session(id);
  json stats = json::array();
  for (const auto& st : s.streams)
    for (const auto& e : analytics::activity_stats(analytics::segment_by_activity(st, s.activities)))
      stats.push_back(to_json(e));
  json corr = to_json(analytics::correlate_streams(s.streams, analytics::kDefaultCorrelationStepMs));
  corr["step_ms"] = analytics::kDefaultCorrelationStepMs;
  corr["activity"] = nullptr;
  json extrema = json::array();
  for (const auto& st : s.streams) {
    json events = json::array();
    for (const auto& e : analytics::detect_extrema(analytics::smooth_sliding_window(st, analytics::kDefaultWindowMs),
                                                   s.activities, analytics::kDefaultProminenceFrac))
      events.push_back(to_json(e));
    extrema.push_back({{"modality", to_string(st.modality)},
                       {"source_id", st.source_id},
                       {"window_ms", analytics::kDefaultWindowMs},
                       {"prominence_frac", analytics::kDefaultProminenceFrac},
                       {"events", events}});
  }
  json tc = to_json(analytics::compare_tests(s.tests->pre, s.tests->post));
  const std::vector<std::pair<std::string, json>> direct = {
      {"activity_stats", stats}, {"correlations", corr}, {"extrema", extrema}, {"test_comparison", tc}};
  for (const auto& [kind, want] : direct) {
    auto r = c.Get(base + "/analytics/" + kind);
    if (!r || json::parse(r->body)["result"] != want) out.fail(kind + " differs from direct invocation");
  }

  // Media served with byte ranges.
  auto part = c.Get("/media/" + id + "/m0_screen", {{"Range", "bytes=0-1023"}});
  if (!part || part->status != 206 || part->body.size() != 1024) out.fail("media range request");

  server.stop();
  th.join();
  if (out.ok) out.detail = std::to_string(paths.size()) + " routes stable, 3 rejected relabels, 4 analytics kinds equal";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  fs::path bundled;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") cli = argv[i + 1];
    if (flag == "--demo") bundled = argv[i + 1];
  }
  const fs::path work = fs::temp_directory_path() / ("mmla-acceptance-" + store::random_session_id());
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"smoothing_oracle", smoothing_oracle},
      {"correlation_oracle", correlation_oracle},
      {"segmentation_partition", segmentation_partition},
      {"clock_alignment", clock_alignment},
      {"extrema_oracle", extrema_oracle},
      {"end_to_end_demo", [&] { return end_to_end(cli, bundled, work); }},
      {"persistence_anonymization", [&] { return persistence(work); }},
      {"api_contract", [&] { return api_contract(work); }},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failures += !o.ok;
    std::cout << (o.ok ? "PASS " : "FAIL ") << name << " - " << o.detail << std::endl;
  }
  std::error_code ec;
  fs::remove_all(work, ec);
  return failures == 0 ? 0 : 1;
}

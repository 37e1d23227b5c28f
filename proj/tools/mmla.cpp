// Command-line front end: ingest, analyze, serve, export, and demo-fixture
// generation against a file-backed session store.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "mmla/config.hpp"
#include "mmla/error.hpp"
#include "mmla/fixture.hpp"
#include "mmla/http.hpp"
#include "mmla/service.hpp"
#include "mmla/store.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  CLI::App app{"Multimodal learning-session engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::string store_root;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--store-root", store_root, "Session store directory (overrides config and MMLA_STORE_ROOT)");

  auto* ingest = app.add_subcommand("ingest", "Ingest a session manifest; prints the new session id");
  std::string manifest;
  ingest->add_option("manifest", manifest)->required();

  auto* analyze = app.add_subcommand("analyze", "Print analytics JSON for a session");
  std::string analyze_id;
  std::vector<std::string> kinds;
  std::vector<std::string> params;
  analyze->add_option("session_id", analyze_id)->required();
  analyze->add_option("--kind", kinds, "activity_stats, correlations, extrema, ranking, test_comparison (default: all)");
  analyze->add_option("--param", params, "key=value analytics parameter, repeatable");

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  int port = 0;
  std::string host = "127.0.0.1";
  serve->add_option("--port", port, "Listen port (default from config, 8080)");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--store-root", store_root, "Session store directory");

  auto* exp = app.add_subcommand("export", "Write the canonical session document to a file");
  std::string export_id;
  std::string export_path;
  exp->add_option("session_id", export_id)->required();
  exp->add_option("path", export_path)->required();

  auto* demo = app.add_subcommand("demo", "Generate the synthetic demo session into a directory");
  std::string demo_dir;
  std::uint64_t seed = 7;
  demo->add_option("dir", demo_dir)->required();
  demo->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*demo) {
      auto info = mmla::fixture::write_demo(demo_dir, seed);
      std::cout << info.manifest.string() << "\n";
      return 0;
    }

    mmla::Config config =
        mmla::Config::load(config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path));
    if (!store_root.empty()) config.store_root = store_root;
    if (port != 0) config.port = port;
    auto store = std::make_shared<mmla::store::FileStore>(config.store_root);
    mmla::service::Service svc(store, config);

    if (*ingest) {
      std::cout << svc.ingest_session(manifest) << "\n";
    } else if (*analyze) {
      mmla::service::Params p;
      for (const auto& kv : params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw mmla::Error(mmla::ErrorCode::BadParams, "--param expects key=value");
        p[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      if (kinds.empty()) {
        json all = json::object();
        for (auto kind : mmla::service::kAnalyticsKinds) {
          if (kind == "ranking") continue;  // needs modality/source_id
          try {
            all[std::string(kind)] = svc.get_analytics(analyze_id, kind, p)["result"];
          } catch (const mmla::Error& e) {
            if (e.code() != mmla::ErrorCode::NotFound || !svc.store().contains(analyze_id)) throw;
            all[std::string(kind)] = nullptr;  // e.g. no test results
          }
        }
        std::cout << json{{"session_id", analyze_id}, {"analytics", all}}.dump(2) << "\n";
      } else {
        for (const auto& kind : kinds) std::cout << svc.get_analytics(analyze_id, kind, p).dump(2) << "\n";
      }
    } else if (*serve) {
      mmla::service::serve(svc, host, config.port);
    } else if (*exp) {
      std::ofstream out(export_path, std::ios::binary);
      if (!out) throw mmla::Error(mmla::ErrorCode::Io, "cannot write " + export_path);
      out << svc.export_session(export_id);
    }
  } catch (const mmla::Error& e) {
    json err = {{"code", mmla::to_string(e.code())}, {"message", e.what()}};
    if (!e.stage().empty()) err["stage"] = e.stage();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}

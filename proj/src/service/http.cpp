#include "mmla/http.hpp"

#include <httplib.h>

#include <iostream>

#include "mmla/error.hpp"
#include "mmla/service.hpp"

using nlohmann::json;

namespace mmla::service {
namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  json body = {{"code", to_string(e.code())}, {"message", e.what()}};
  if (!e.stage().empty()) body["stage"] = e.stage();
  send_json(res, body, http_status(e.code()));
}

// Wraps a handler so engine errors become JSON error bodies.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(ErrorCode::BadParams, std::string("malformed JSON body: ") + e.what()));
    } catch (const std::exception& e) {
      send_json(res, {{"code", "Internal"}, {"message", e.what()}}, 500);
    }
  };
}

Params query_params(const httplib::Request& req) {
  Params p;
  for (const auto& [k, v] : req.params) p[k] = v;
  return p;
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw Error(ErrorCode::BadParams, "request body must be a JSON object");
  return body;
}

}  // namespace

void install_routes(httplib::Server& server, Service& svc) {
  server.Get("/api/sessions", guarded([&svc](const httplib::Request&, httplib::Response& res) {
               send_json(res, svc.list_sessions());
             }));

  // Path-reference ingest: {"manifest_path": "/abs/or/server-relative/manifest.json"}.
  server.Post("/api/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                json body = parse_body(req);
                if (!body.contains("manifest_path") || !body["manifest_path"].is_string())
                  throw Error(ErrorCode::BadParams, "body must contain string 'manifest_path'");
                std::string id = svc.ingest_session(body["manifest_path"].get<std::string>());
                send_json(res, {{"session_id", id}}, 201);
              }));

  server.Get(R"(/api/sessions/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, svc.get_session(req.matches[1]));
             }));

  server.Get(R"(/api/sessions/([^/]+)/streams/([^/]+)/([^/]+))",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               auto modality = parse_modality(req.matches[2].str());
               if (!modality) throw Error(ErrorCode::NotFound, "unknown modality '" + req.matches[2].str() + "'");
               Params p = query_params(req);
               std::optional<std::int64_t> smooth;
               std::optional<std::string> activity;
               for (const auto& [k, v] : p) {
                 if (k == "smooth") {
                   try {
                     std::size_t used = 0;
                     smooth = std::stoll(v, &used);
                     if (used != v.size() || *smooth < 0) throw std::invalid_argument(v);
                   } catch (const std::exception&) {
                     throw Error(ErrorCode::BadParams, "smooth must be a non-negative integer window in ms");
                   }
                 } else if (k == "activity") {
                   activity = v;
                 } else {
                   throw Error(ErrorCode::BadParams, "unknown parameter '" + k + "'");
                 }
               }
               send_json(res, svc.get_stream(req.matches[1], *modality, req.matches[3], smooth, activity));
             }));

  server.Get(R"(/api/sessions/([^/]+)/activities)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, svc.get_activities(req.matches[1]));
             }));

  server.Put(R"(/api/sessions/([^/]+)/activities)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               json body = parse_body(req);
               RelabelRequest r;
               r.session_id = req.matches[1];
               if (body.contains("session_id") && body["session_id"] != r.session_id)
                 throw Error(ErrorCode::BadParams, "session_id in body does not match the URL");
               if (!body.contains("base_version") || !body["base_version"].is_number_integer())
                 throw Error(ErrorCode::BadParams, "body must contain integer 'base_version'");
               r.base_version = body["base_version"].get<std::int64_t>();
               if (!body.contains("activities")) throw Error(ErrorCode::BadParams, "body must contain 'activities'");
               r.activities = activities_from_json(body["activities"]);
               std::int64_t version = svc.relabel(r);
               send_json(res, {{"session_id", r.session_id}, {"activities_version", version}});
             }));

  server.Get(R"(/api/sessions/([^/]+)/analytics/([^/]+))",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, svc.get_analytics(req.matches[1], req.matches[2].str(), query_params(req)));
             }));

  server.Get(R"(/api/sessions/([^/]+)/media)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, svc.get_media_manifest(req.matches[1]));
             }));

  // Static media with Range support.
  if (auto root = svc.store().media_root()) server.set_mount_point("/media", root->string());
}

void serve(Service& svc, const std::string& host, int port) {
  httplib::Server server;
  install_routes(server, svc);
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace mmla::service

#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace mmla::service {

class Service;

/// Registers the JSON API under /api and the media route under /media.
void install_routes(httplib::Server& server, Service& service);

/// Blocks serving on host:port until the server is stopped.
void serve(Service& service, const std::string& host, int port);

}  // namespace mmla::service

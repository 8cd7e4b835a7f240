#pragma once

#include <string>

#include "bisg/session.hpp"

namespace httplib {
class Server;
}

namespace bisg {

// Registers the session endpoints on `server`:
//   POST /sessions                      {network, unit_budget, rounds, seed}
//   POST /sessions/{id}/rounds/{n}      {allocation}
//   GET  /sessions/{id}                 session state
//   GET  /sessions/{id}/summary
//   GET  /networks/{A|B}
// Errors are answered with {code, message}.
void mount_session_api(httplib::Server& server, SessionStore& store);

// HTTP status used for a SessionError code.
int http_status(const std::string& code);

// Blocks serving the API until the process is stopped.
bool serve_sessions(SessionStore& store, const std::string& host, int port);

}  // namespace bisg

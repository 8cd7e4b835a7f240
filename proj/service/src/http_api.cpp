#include "bisg/http_api.hpp"

#include <httplib.h>

namespace bisg {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json; charset=utf-8";

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message) {
  send(res, http_status(code), {{"code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object())
    throw SessionError("invalid_json", "request body must be a JSON object");
  return body;
}

template <class T>
T field(const json& body, const std::string& key, T fallback) {
  if (!body.contains(key)) return fallback;
  try {
    return body.at(key).get<T>();
  } catch (const json::exception&) {
    throw SessionError("invalid_parameter", "field '" + key + "' has the wrong type");
  }
}

int integer_field(const json& body, const std::string& key, int fallback) {
  if (!body.contains(key)) return fallback;
  const json& v = body.at(key);
  if (!v.is_number_integer())
    throw SessionError("invalid_parameter", "field '" + key + "' must be an integer");
  return v.get<int>();
}

std::map<std::string, double> allocation_field(const json& body) {
  if (!body.contains("allocation") || !body.at("allocation").is_object())
    throw SessionError("invalid_parameter", "field 'allocation' must map edges to units");
  std::map<std::string, double> units;
  for (const auto& [key, value] : body.at("allocation").items()) {
    if (!value.is_number())
      throw SessionError("invalid_parameter", "units on " + key + " must be a number");
    units[key] = value.get<double>();
  }
  return units;
}

template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const SessionError& e) {
      send_error(res, e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, "internal", e.what());
    }
  };
}

}  // namespace

int http_status(const std::string& code) {
  if (code == "not_found" || code == "unknown_network") return 404;
  if (code == "out_of_order" || code == "session_complete" || code == "session_incomplete") return 409;
  if (code == "internal" || code == "storage") return 500;
  return 400;
}

void mount_session_api(httplib::Server& server, SessionStore& store) {
  server.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const Session s = store.create(field<std::string>(body, "network", "A"),
                                   integer_field(body, "unit_budget", 24),
                                   integer_field(body, "rounds", 10),
                                   field<std::uint64_t>(body, "seed", 0));
    send(res, 201, to_json(s));
  }));

  server.Post(R"(/sessions/([^/]+)/rounds/([^/]+))",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const std::string& n = req.matches[2].str();
                if (n.empty() || n.find_first_not_of("0123456789") != std::string::npos ||
                    n.size() > 9)
                  throw SessionError("out_of_order", "round index '" + n + "' is not a round number");
                const RoundResult r = store.submit(req.matches[1].str(), std::stoi(n),
                                                   allocation_field(parse_body(req)));
                send(res, 200,
                     {{"outcome", to_string(r.outcome.outcome)},
                      {"path", r.outcome.path},
                      {"probability", r.outcome.probability},
                      {"round", std::stoi(n)},
                      {"session", to_json(r.session)}});
              }));

  server.Get(R"(/sessions/([^/]+)/summary)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               send(res, 200, to_json(store.summary(req.matches[1].str())));
             }));

  server.Get(R"(/sessions/([^/]+))",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               send(res, 200, to_json(store.get(req.matches[1].str())));
             }));

  server.Get(R"(/networks/([^/]+))",
             guarded([](const httplib::Request& req, httplib::Response& res) {
               send(res, 200, network_description(req.matches[1].str()));
             }));

  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404)
      send_error(res, "not_found", "no route for " + req.method + " " + req.path);
  });
}

bool serve_sessions(SessionStore& store, const std::string& host, int port) {
  httplib::Server server;
  mount_session_api(server, store);
  return server.listen(host, port);
}

}  // namespace bisg

#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "ixptk/collector.hpp"

namespace ixptk {

// HTTP front of the collector store:
//   POST /v1/batches          body = batch JSON            -> accepted/duplicate
//   GET  /v1/traces?from=&to=&probe=                       -> JSON-lines stream
//   GET  /v1/health                                        -> {"status":"ok"}
// Every data endpoint requires "Authorization: Bearer <token>" with a token
// from the config's per-probe list.
class CollectorServer {
 public:
  CollectorServer(CollectorStore& store, std::vector<std::string> tokens)
      : store_(store), tokens_(std::move(tokens)) {
    svr_.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"status\":\"ok\"}\n", "application/json");
    });

    svr_.Post("/v1/batches", [this](const httplib::Request& req, httplib::Response& res) {
      if (!authorized(req)) return reject_unauthorized(res);
      Batch batch;
      try {
        batch = batch_from_json(nlohmann::json::parse(req.body));
      } catch (const std::exception& e) {
        return reject(res, 400, e.what());
      }
      try {
        const auto status = store_.submit_batch(batch);
        nlohmann::json j;
        j["status"] = status == SubmitStatus::Accepted ? "accepted" : "duplicate";
        res.set_content(j.dump() + "\n", "application/json");
      } catch (const std::exception& e) {
        return reject(res, 400, e.what());
      }
    });

    svr_.Get("/v1/traces", [this](const httplib::Request& req, httplib::Response& res) {
      if (!authorized(req)) return reject_unauthorized(res);
      const std::string from = req.get_param_value("from");
      const std::string to = req.get_param_value("to");
      std::optional<std::string> probe;
      if (req.has_param("probe")) probe = req.get_param_value("probe");
      std::string body;
      try {
        store_.query_traces(from, to, probe,
                            [&](const TraceRecord& rec) { body += to_jsonl(rec) + "\n"; });
      } catch (const std::exception& e) {
        return reject(res, 400, e.what());
      }
      res.set_content(body, "application/x-ndjson");
    });
  }

  // Binds and serves on a background thread until stop().
  void start(const std::string& host, int port) {
    if (!svr_.bind_to_port(host, port))
      throw std::runtime_error("collector: cannot bind " + host + ":" +
                               std::to_string(port));
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
  }

  // Binds an ephemeral port and returns it; used by tests.
  int start_any_port(const std::string& host) {
    const int port = svr_.bind_to_any_port(host);
    if (port <= 0) throw std::runtime_error("collector: cannot bind " + host);
    thread_ = std::thread([this] { svr_.listen_after_bind(); });
    svr_.wait_until_ready();
    return port;
  }

  void stop() {
    svr_.stop();
    if (thread_.joinable()) thread_.join();
  }

  ~CollectorServer() { stop(); }

 private:
  bool authorized(const httplib::Request& req) const {
    const std::string header = req.get_header_value("Authorization");
    for (const auto& token : tokens_)
      if (header == "Bearer " + token) return true;
    return false;
  }

  static void reject(httplib::Response& res, int code, const std::string& message) {
    nlohmann::json j;
    j["error"] = message;
    res.status = code;
    res.set_content(j.dump() + "\n", "application/json");
  }

  static void reject_unauthorized(httplib::Response& res) {
    reject(res, 401, "missing or invalid token");
  }

  CollectorStore& store_;
  std::vector<std::string> tokens_;
  httplib::Server svr_;
  std::thread thread_;
};

inline std::pair<std::string, int> split_listen_address(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos)
    throw std::runtime_error("bad listen address '" + listen + "' (want host:port)");
  const std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::runtime_error("bad port in listen address '" + listen + "'");
  }
  return {host, port};
}

// Probe-side push of one daily batch. Returns the server's status string.
inline std::string push_batch(const std::string& host, int port, const std::string& token,
                              const Batch& batch) {
  httplib::Client client(host, port);
  httplib::Headers headers{{"Authorization", "Bearer " + token}};
  auto res = client.Post("/v1/batches", headers, to_json(batch).dump(),
                         "application/json");
  if (!res) throw std::runtime_error("collector unreachable at " + host + ":" +
                                     std::to_string(port));
  if (res->status != 200) throw std::runtime_error("collector rejected batch: " + res->body);
  return nlohmann::json::parse(res->body).at("status").get<std::string>();
}

}  // namespace ixptk

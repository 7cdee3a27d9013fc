#include "coda/orchestrator/master.hpp"

#include <httplib.h>

#include "coda/common/error.hpp"
#include "coda/store/trajectory.hpp"

namespace coda::orchestrator {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_header(kSchemaHeader, kSchemaVersion);
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  reply(res, status, {{"error", code}, {"message", message}});
}

int status_for(const std::string& code) {
  if (code == "unknown_unit" || code == "unknown_worker") return 404;
  if (code == "not_leased") return 409;
  if (code == "invalid_result") return 422;
  return 400;
}

// Parses and validates a POST body, then runs `fn` with it. Contract
// failures become 4xx bodies.
template <typename Fn>
void handle(const httplib::Request& req, httplib::Response& res, Fn fn) {
  if (req.get_header_value(kSchemaHeader) != kSchemaVersion) {
    reply_error(res, 400, "schema_mismatch",
                std::string("expected ") + kSchemaHeader + ": " + kSchemaVersion);
    return;
  }
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception& e) {
    reply_error(res, 400, "malformed_request", e.what());
    return;
  }
  if (!body.is_object()) {
    reply_error(res, 400, "malformed_request", "body must be a JSON object");
    return;
  }
  try {
    fn(body);
  } catch (const Error& e) {
    reply_error(res, status_for(e.code()), e.code(), e.what());
  } catch (const json::exception& e) {
    reply_error(res, 400, "malformed_request", e.what());
  }
}

}  // namespace

Master::Master(std::vector<WorkUnit> units, MasterOptions options, store::Run* run)
    : options_(std::move(options)),
      run_(run),
      queue_(std::move(units), options_.queue,
             [this](const WorkUnit&, const std::vector<store::Trajectory>& ts) {
               if (!run_) return;
               for (const auto& t : ts) run_->append_trajectory(t);
             }),
      server_(std::make_unique<httplib::Server>()) {
  routes();
}

Master::~Master() { stop(); }

void Master::routes() {
  auto& s = *server_;
  s.Post("/register", [this](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& b) {
      const std::string name = b.value("name", std::string());
      reply(res, 200, {{"worker_id", queue_.register_worker(name)}});
    });
  });
  s.Post("/lease", [this](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& b) {
      const auto g = queue_.lease(b.at("worker_id").get<std::string>(), Clock::now());
      reply(res, 200,
            {{"unit", g.unit ? to_json(*g.unit) : json(nullptr)},
             {"retry_after_ms", g.retry_after.count()},
             {"drained", g.drained}});
    });
  });
  s.Post("/result", [this](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& b) {
      std::vector<store::Trajectory> ts;
      for (const auto& t : b.at("trajectories")) ts.push_back(store::trajectory_from_json(t));
      const Ack a = queue_.submit(b.at("worker_id").get<std::string>(), b.at("unit_id").get<std::string>(),
                                  std::move(ts), b.value("wall_seconds", 0.0), Clock::now());
      reply(res, 200, {{"ack", a == Ack::kAccepted ? "ack" : "ack-duplicate"}});
    });
  });
  s.Post("/fail", [this](const httplib::Request& req, httplib::Response& res) {
    handle(req, res, [&](const json& b) {
      queue_.report_failure(b.at("worker_id").get<std::string>(), b.at("unit_id").get<std::string>(),
                            b.value("reason", std::string("unspecified")), Clock::now());
      reply(res, 200, {{"ack", "ack"}});
    });
  });
  s.Get("/status", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, queue_.status(Clock::now()).to_json());
  });
}

int Master::start() {
  if (thread_.joinable()) return port_;
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else {
    port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ <= 0) throw Error("bind_failed", "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  // stop() is a no-op until the listen loop is running.
  server_->wait_until_ready();
  return port_;
}

void Master::stop() {
  if (!thread_.joinable()) return;
  server_->stop();
  thread_.join();
}

std::string Master::url() const { return "http://" + options_.host + ":" + std::to_string(port_); }

bool Master::wait_drained(std::chrono::milliseconds timeout) {
  const auto end = Clock::now() + timeout;
  while (true) {
    queue_.expire(Clock::now());
    if (queue_.drained()) return true;
    if (Clock::now() >= end) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace coda::orchestrator

#pragma once

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "coda/orchestrator/queue.hpp"
#include "coda/store/run.hpp"

namespace httplib {
class Server;
}

namespace coda::orchestrator {

inline constexpr const char* kSchemaHeader = "X-Coda-Schema";
inline constexpr const char* kSchemaVersion = "1";

struct MasterOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  QueueConfig queue;
};

// HTTP front end of a WorkQueue.
//   POST /register {"name"}                      -> {"worker_id"}
//   POST /lease    {"worker_id"}                 -> {"unit": WorkUnit|null, "retry_after_ms", "drained"}
//   POST /result   {"worker_id","unit_id","trajectories","wall_seconds"}
//                                                -> {"ack": "ack"|"ack-duplicate"}
//   POST /fail     {"worker_id","unit_id","reason"} -> {"ack": "ack"}
//   GET  /status                                 -> QueueStatus
// POST bodies must carry the schema header. Errors are 4xx with
// {"error": code, "message": text}.
class Master {
 public:
  // With a run, every accepted trajectory is appended to it in arrival order.
  Master(std::vector<WorkUnit> units, MasterOptions options, store::Run* run = nullptr);
  ~Master();
  Master(const Master&) = delete;
  Master& operator=(const Master&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Stops accepting; requests already being handled finish first.
  void stop();
  std::string url() const;
  int port() const { return port_; }

  // Blocks until every unit is completed or poisoned, or `timeout` passes.
  bool wait_drained(std::chrono::milliseconds timeout);

  WorkQueue& queue() { return queue_; }

 private:
  void routes();

  MasterOptions options_;
  store::Run* run_;
  WorkQueue queue_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace coda::orchestrator

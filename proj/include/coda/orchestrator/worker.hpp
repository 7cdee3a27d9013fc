#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>

#include "coda/env/catalog.hpp"
#include "coda/orchestrator/master.hpp"
#include "coda/orchestrator/unit.hpp"

namespace coda::orchestrator {

// Failures a worker injects into its own run, for fault-tolerance tests.
struct FaultPlan {
  int die_after_leases = -1;    // stop silently while holding lease number N (0-based); -1 never
  double duplicate_rate = 0.0;  // chance of replaying each accepted result
  std::uint64_t seed = 0;
};

struct WorkerOptions {
  std::string master_url;
  std::string name = "worker";
  int connect_attempts = 8;  // consecutive failed requests before giving up
  std::chrono::milliseconds backoff_initial{50};
  std::chrono::milliseconds backoff_max{2000};
  FaultPlan faults;
  const std::atomic<bool>* stop = nullptr;  // checked between units
};

struct WorkerStats {
  std::string worker_id;
  int leased = 0;
  int accepted = 0;
  int duplicates_sent = 0;
  int duplicate_acks = 0;
  int failed_units = 0;
  bool died = false;
};

// register -> lease -> execute -> submit until the master reports drained.
// Throws Error("master_unreachable") after `connect_attempts` consecutive
// failed requests with exponential backoff.
WorkerStats run_worker(const env::Catalog& catalog, const WorkerOptions& options);

// Serves the units from an in-process master on an ephemeral port and
// drains them with `workers` worker threads.
class HttpBackend final : public RolloutBackend {
 public:
  HttpBackend(const env::Catalog& catalog, int workers, QueueConfig queue = {});
  // Throws Error("poisoned_units") if any unit could not be completed.
  std::vector<store::Trajectory> run(const std::vector<WorkUnit>& units) override;

 private:
  const env::Catalog* catalog_;
  int workers_;
  QueueConfig queue_;
};

}  // namespace coda::orchestrator

#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "coda/orchestrator/unit.hpp"

namespace coda::orchestrator {

using Clock = std::chrono::steady_clock;

struct QueueConfig {
  std::chrono::milliseconds lease_deadline{60000};
  int max_retries = 3;
  std::chrono::milliseconds retry_after{200};
};

struct QueueStatus {
  std::size_t total = 0;
  std::size_t queued = 0;
  std::size_t in_flight = 0;
  std::size_t completed = 0;
  std::size_t poisoned = 0;
  std::size_t workers = 0;
  std::size_t duplicates = 0;
  bool drained = false;

  // Body of GET /status:
  // {"total","queued","in_flight","completed","poisoned","workers",
  //  "duplicates","drained"}
  nlohmann::json to_json() const;
};

enum class Ack { kAccepted, kDuplicate };

struct LeaseGrant {
  std::optional<WorkUnit> unit;
  std::chrono::milliseconds retry_after{0};
  bool drained = false;
};

// Master-side queue state. Every public call is one serialized transition.
// Seeds live in the units, so which worker runs a unit never changes its
// trajectories.
class WorkQueue {
 public:
  // Called under the queue lock for every accepted result, in arrival order.
  using Ingest = std::function<void(const WorkUnit&, const std::vector<store::Trajectory>&)>;

  WorkQueue(std::vector<WorkUnit> units, QueueConfig config, Ingest ingest = {});

  std::string register_worker(const std::string& name);
  LeaseGrant lease(const std::string& worker_id, Clock::time_point now);
  // Throws Error("unknown_worker" | "unknown_unit" | "not_leased" |
  // "invalid_result"). A result for a unit that already completed is a
  // duplicate and is discarded.
  Ack submit(const std::string& worker_id, const std::string& unit_id, std::vector<store::Trajectory> trajectories,
             double wall_seconds, Clock::time_point now);
  // The worker gave up on a unit; it goes back to the queue or is poisoned.
  void report_failure(const std::string& worker_id, const std::string& unit_id, const std::string& reason,
                      Clock::time_point now);
  // Re-queues units whose lease deadline has passed.
  void expire(Clock::time_point now);

  QueueStatus status(Clock::time_point now);
  bool drained() const;
  std::vector<std::string> poisoned() const;
  std::vector<std::string> lease_order() const;
  std::vector<std::string> arrival_order() const;
  // Completed units' trajectories, aggregated over the units that were not
  // poisoned.
  std::vector<store::Trajectory> results() const;

 private:
  enum class State { kQueued, kLeased, kCompleted, kPoisoned };
  struct Entry {
    WorkUnit unit;
    State state = State::kQueued;
    std::string worker;
    Clock::time_point deadline{};
    int failures = 0;
    bool ever_leased = false;
    std::vector<store::Trajectory> trajectories;
  };

  void fail_locked(Entry& e, const std::string& reason);
  void expire_locked(Clock::time_point now);
  bool drained_locked() const;

  mutable std::mutex mu_;
  QueueConfig config_;
  Ingest ingest_;
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
  std::deque<std::size_t> pending_;   // FIFO of queued entry indices
  std::map<std::string, std::string> workers_;
  std::vector<std::string> lease_order_;
  std::vector<std::string> arrival_order_;
  std::size_t duplicates_ = 0;
};

}  // namespace coda::orchestrator

#include "coda/orchestrator/queue.hpp"

#include <iostream>

#include "coda/common/error.hpp"

namespace coda::orchestrator {

nlohmann::json QueueStatus::to_json() const {
  return {{"total", total},         {"queued", queued},   {"in_flight", in_flight},   {"completed", completed},
          {"poisoned", poisoned},   {"workers", workers}, {"duplicates", duplicates}, {"drained", drained}};
}

WorkQueue::WorkQueue(std::vector<WorkUnit> units, QueueConfig config, Ingest ingest)
    : config_(config), ingest_(std::move(ingest)) {
  if (config_.max_retries < 0) throw Error("invalid_argument", "max_retries must be non-negative");
  entries_.reserve(units.size());
  for (auto& u : units) {
    if (index_.count(u.unit_id)) throw Error("invalid_argument", "duplicate unit id " + u.unit_id);
    index_[u.unit_id] = entries_.size();
    pending_.push_back(entries_.size());
    Entry e;
    e.unit = std::move(u);
    entries_.push_back(std::move(e));
  }
}

std::string WorkQueue::register_worker(const std::string& name) {
  std::lock_guard lock(mu_);
  const std::string id = "w" + std::to_string(workers_.size());
  workers_[id] = name;
  return id;
}

void WorkQueue::fail_locked(Entry& e, const std::string& reason) {
  e.worker.clear();
  ++e.failures;
  if (e.failures > config_.max_retries) {
    e.state = State::kPoisoned;
    std::cerr << "warning: unit " << e.unit.unit_id << " poisoned after " << e.failures << " failures (" << reason
              << ")\n";
    return;
  }
  e.state = State::kQueued;
  pending_.push_back(index_.at(e.unit.unit_id));
}

void WorkQueue::expire_locked(Clock::time_point now) {
  for (auto& e : entries_) {
    if (e.state == State::kLeased && now >= e.deadline) fail_locked(e, "lease expired");
  }
}

bool WorkQueue::drained_locked() const {
  for (const auto& e : entries_) {
    if (e.state == State::kQueued || e.state == State::kLeased) return false;
  }
  return true;
}

LeaseGrant WorkQueue::lease(const std::string& worker_id, Clock::time_point now) {
  std::lock_guard lock(mu_);
  if (!workers_.count(worker_id)) throw Error("unknown_worker", "worker " + worker_id + " is not registered");
  expire_locked(now);
  LeaseGrant g;
  if (pending_.empty()) {
    g.drained = drained_locked();
    g.retry_after = config_.retry_after;
    return g;
  }
  Entry& e = entries_[pending_.front()];
  pending_.pop_front();
  e.state = State::kLeased;
  e.worker = worker_id;
  e.deadline = now + config_.lease_deadline;
  e.ever_leased = true;
  lease_order_.push_back(e.unit.unit_id);
  g.unit = e.unit;
  return g;
}

Ack WorkQueue::submit(const std::string& worker_id, const std::string& unit_id,
                      std::vector<store::Trajectory> trajectories, double /*wall_seconds*/, Clock::time_point) {
  std::lock_guard lock(mu_);
  if (!workers_.count(worker_id)) throw Error("unknown_worker", "worker " + worker_id + " is not registered");
  const auto it = index_.find(unit_id);
  if (it == index_.end()) throw Error("unknown_unit", "no unit " + unit_id);
  Entry& e = entries_[it->second];
  if (e.state == State::kCompleted) {
    ++duplicates_;
    return Ack::kDuplicate;
  }
  if (!e.ever_leased) throw Error("not_leased", "unit " + unit_id + " was never leased");
  if (static_cast<int>(trajectories.size()) != e.unit.spec.samples) {
    throw Error("invalid_result", "unit " + unit_id + " expects " + std::to_string(e.unit.spec.samples) +
                                      " trajectories, got " + std::to_string(trajectories.size()));
  }
  for (std::size_t s = 0; s < trajectories.size(); ++s) {
    if (trajectories[s].unit_id != unit_id || trajectories[s].sample != static_cast<int>(s)) {
      throw Error("invalid_result", "trajectory " + std::to_string(s) + " does not belong to unit " + unit_id);
    }
  }
  // A late result from an expired lease still counts; the unit may be
  // sitting in the queue again, or even poisoned.
  if (e.state == State::kQueued) {
    for (auto p = pending_.begin(); p != pending_.end(); ++p) {
      if (*p == it->second) {
        pending_.erase(p);
        break;
      }
    }
  }
  e.state = State::kCompleted;
  e.worker.clear();
  e.trajectories = std::move(trajectories);
  arrival_order_.push_back(unit_id);
  if (ingest_) ingest_(e.unit, e.trajectories);
  return Ack::kAccepted;
}

void WorkQueue::report_failure(const std::string& worker_id, const std::string& unit_id, const std::string& reason,
                               Clock::time_point now) {
  std::lock_guard lock(mu_);
  if (!workers_.count(worker_id)) throw Error("unknown_worker", "worker " + worker_id + " is not registered");
  const auto it = index_.find(unit_id);
  if (it == index_.end()) throw Error("unknown_unit", "no unit " + unit_id);
  Entry& e = entries_[it->second];
  expire_locked(now);
  // Only the current lease holder can fail a unit; anything else is stale.
  if (e.state == State::kLeased && e.worker == worker_id) fail_locked(e, reason);
}

void WorkQueue::expire(Clock::time_point now) {
  std::lock_guard lock(mu_);
  expire_locked(now);
}

QueueStatus WorkQueue::status(Clock::time_point now) {
  std::lock_guard lock(mu_);
  expire_locked(now);
  QueueStatus s;
  s.total = entries_.size();
  for (const auto& e : entries_) {
    switch (e.state) {
      case State::kQueued: ++s.queued; break;
      case State::kLeased: ++s.in_flight; break;
      case State::kCompleted: ++s.completed; break;
      case State::kPoisoned: ++s.poisoned; break;
    }
  }
  s.workers = workers_.size();
  s.duplicates = duplicates_;
  s.drained = s.queued == 0 && s.in_flight == 0;
  return s;
}

bool WorkQueue::drained() const {
  std::lock_guard lock(mu_);
  return drained_locked();
}

std::vector<std::string> WorkQueue::poisoned() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.state == State::kPoisoned) out.push_back(e.unit.unit_id);
  }
  return out;
}

std::vector<std::string> WorkQueue::lease_order() const {
  std::lock_guard lock(mu_);
  return lease_order_;
}

std::vector<std::string> WorkQueue::arrival_order() const {
  std::lock_guard lock(mu_);
  return arrival_order_;
}

std::vector<store::Trajectory> WorkQueue::results() const {
  std::lock_guard lock(mu_);
  std::vector<store::Trajectory> all;
  std::vector<WorkUnit> units;
  for (const auto& e : entries_) {
    if (e.state == State::kPoisoned) continue;
    units.push_back(e.unit);
    all.insert(all.end(), e.trajectories.begin(), e.trajectories.end());
  }
  return aggregate(std::move(all), units);
}

}  // namespace coda::orchestrator

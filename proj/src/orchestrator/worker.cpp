#include "coda/orchestrator/worker.hpp"

#include <httplib.h>

#include <algorithm>
#include <thread>

#include "coda/common/error.hpp"
#include "coda/common/rng.hpp"
#include "coda/store/trajectory.hpp"

namespace coda::orchestrator {

using nlohmann::json;

namespace {

class MasterClient {
 public:
  explicit MasterClient(const WorkerOptions& o) : opts_(o), cli_(o.master_url) {
    cli_.set_connection_timeout(std::chrono::seconds(5));
    cli_.set_read_timeout(std::chrono::seconds(60));
    cli_.set_write_timeout(std::chrono::seconds(60));
  }

  // Retries transport failures and 5xx with bounded exponential backoff.
  // 4xx replies are returned to the caller as errors.
  json call(const std::string& path, const json* body) {
    auto delay = opts_.backoff_initial;
    for (int attempt = 1;; ++attempt) {
      httplib::Result r = body ? cli_.Post(path, {{kSchemaHeader, kSchemaVersion}}, body->dump(), "application/json")
                               : cli_.Get(path, {{kSchemaHeader, kSchemaVersion}});
      if (r && r->status < 500) {
        json j = json::parse(r->body);
        if (r->status >= 400) {
          throw Error(j.value("error", std::string("http_error")), j.value("message", std::string()));
        }
        return j;
      }
      if (attempt >= opts_.connect_attempts) {
        throw Error("master_unreachable", "no response from " + opts_.master_url + path + " after " +
                                              std::to_string(attempt) + " attempts");
      }
      std::this_thread::sleep_for(delay);
      delay = std::min(delay * 2, opts_.backoff_max);
    }
  }

 private:
  const WorkerOptions& opts_;
  httplib::Client cli_;
};

json result_body(const std::string& worker, const WorkUnit& u, const std::vector<store::Trajectory>& ts,
                 double wall) {
  json arr = json::array();
  for (const auto& t : ts) arr.push_back(store::to_json(t));
  return {{"worker_id", worker}, {"unit_id", u.unit_id}, {"trajectories", arr}, {"wall_seconds", wall}};
}

}  // namespace

WorkerStats run_worker(const env::Catalog& catalog, const WorkerOptions& options) {
  MasterClient client(options);
  Rng rng(options.faults.seed);
  WorkerStats st;
  const json reg = {{"name", options.name}};
  st.worker_id = client.call("/register", &reg).at("worker_id").get<std::string>();
  const json lease_req = {{"worker_id", st.worker_id}};
  while (!(options.stop && options.stop->load())) {
    const json g = client.call("/lease", &lease_req);
    if (g.at("unit").is_null()) {
      if (g.at("drained").get<bool>()) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(g.at("retry_after_ms").get<long>()));
      continue;
    }
    const WorkUnit unit = unit_from_json(g.at("unit"));
    if (st.leased++ == options.faults.die_after_leases) {
      st.died = true;
      return st;
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<store::Trajectory> ts;
    try {
      ts = execute_unit(catalog, unit);
    } catch (const std::exception& e) {
      ++st.failed_units;
      const json f = {{"worker_id", st.worker_id}, {"unit_id", unit.unit_id}, {"reason", e.what()}};
      client.call("/fail", &f);
      continue;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const json body = result_body(st.worker_id, unit, ts, wall);
    if (client.call("/result", &body).at("ack") == "ack") {
      ++st.accepted;
    } else {
      ++st.duplicate_acks;
    }
    if (options.faults.duplicate_rate > 0.0 && rng.uniform() < options.faults.duplicate_rate) {
      ++st.duplicates_sent;
      if (client.call("/result", &body).at("ack") == "ack-duplicate") ++st.duplicate_acks;
    }
  }
  return st;
}

HttpBackend::HttpBackend(const env::Catalog& catalog, int workers, QueueConfig queue)
    : catalog_(&catalog), workers_(workers), queue_(queue) {
  if (workers < 1) throw Error("invalid_argument", "need at least one worker");
}

std::vector<store::Trajectory> HttpBackend::run(const std::vector<WorkUnit>& units) {
  MasterOptions mo;
  mo.queue = queue_;
  Master master(units, mo);
  master.start();
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers_);
  for (int i = 0; i < workers_; ++i) {
    threads.emplace_back([&, i] {
      WorkerOptions wo;
      wo.master_url = master.url();
      wo.name = "local-" + std::to_string(i);
      try {
        run_worker(*catalog_, wo);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  master.stop();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  const auto poisoned = master.queue().poisoned();
  if (!poisoned.empty()) {
    throw Error("poisoned_units", std::to_string(poisoned.size()) + " units poisoned, first " + poisoned.front());
  }
  return master.queue().results();
}

}  // namespace coda::orchestrator

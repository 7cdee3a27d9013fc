#include "doctest.h"

#include <httplib.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <thread>

#include "coda/common/digest.hpp"
#include "coda/orchestrator/master.hpp"
#include "coda/orchestrator/queue.hpp"
#include "coda/orchestrator/worker.hpp"
#include "coda/store/run.hpp"
#include "fixtures.hpp"

using namespace coda;
using namespace coda::orchestrator;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

const env::Catalog& cat() { return env::Catalog::builtin(); }

const std::vector<WorkUnit>& units10() {
  static const auto u = testing::work_units(11, 10, 2);
  return u;
}

std::vector<store::Trajectory> run_unit(const WorkUnit& u) { return execute_unit(cat(), u); }

std::set<std::string> digests(const std::vector<store::Trajectory>& ts) {
  std::set<std::string> out;
  for (const auto& t : ts) out.insert(sha256_hex(store::to_json(t).dump()));
  return out;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("coda_orch_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

httplib::Headers schema() { return {{kSchemaHeader, kSchemaVersion}}; }

}  // namespace

TEST_CASE("work unit json round-trip") {
  for (const auto& u : units10()) {
    CHECK(unit_from_json(to_json(u)) == u);
    CHECK(unit_from_json(nlohmann::json::parse(to_json(u).dump())) == u);
  }
}

TEST_CASE("aggregate sorts, names missing units, accepts empty runs") {
  const auto& units = units10();
  std::vector<store::Trajectory> all;
  for (const auto& u : units) {
    const auto ts = run_unit(u);
    all.insert(all.end(), ts.begin(), ts.end());
  }
  const auto ordered = aggregate(all, units);
  auto shuffled = all;
  std::mt19937 g(5);
  std::shuffle(shuffled.begin(), shuffled.end(), g);
  CHECK(aggregate(shuffled, units) == ordered);
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    CHECK(std::make_pair(ordered[i - 1].unit_id, ordered[i - 1].sample) <
          std::make_pair(ordered[i].unit_id, ordered[i].sample));
  }

  auto missing = all;
  missing.erase(std::remove_if(missing.begin(), missing.end(),
                               [&](const store::Trajectory& t) { return t.unit_id == units[3].unit_id; }),
                missing.end());
  try {
    aggregate(missing, units);
    FAIL("expected incomplete_run");
  } catch (const Error& e) {
    CHECK(e.code() == "incomplete_run");
    CHECK(std::string(e.what()).find(units[3].unit_id) != std::string::npos);
  }
  CHECK(aggregate({}, {}).empty());
}

TEST_CASE("queue: lease, complete, duplicate") {
  WorkQueue q(units10(), {});
  const auto w = q.register_worker("a");
  const auto t0 = Clock::now();
  const auto g = q.lease(w, t0);
  REQUIRE(g.unit);
  CHECK(g.unit->unit_id == units10()[0].unit_id);
  CHECK(q.status(t0).in_flight == 1);
  CHECK(q.submit(w, g.unit->unit_id, run_unit(*g.unit), 0.1, t0) == Ack::kAccepted);
  CHECK(q.submit(w, g.unit->unit_id, run_unit(*g.unit), 0.1, t0) == Ack::kDuplicate);
  const auto s = q.status(t0);
  CHECK(s.completed == 1);
  CHECK(s.queued == 9);
  CHECK(s.duplicates == 1);
  CHECK(!s.drained);
}

TEST_CASE("queue: contract violations") {
  WorkQueue q(units10(), {});
  const auto w = q.register_worker("a");
  const auto t0 = Clock::now();
  const auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return std::string("none");
  };
  CHECK(code([&] { q.lease("nobody", t0); }) == "unknown_worker");
  CHECK(code([&] { q.submit(w, "nope", {}, 0, t0); }) == "unknown_unit");
  CHECK(code([&] { q.submit(w, units10()[5].unit_id, run_unit(units10()[5]), 0, t0); }) == "not_leased");
  const auto g = q.lease(w, t0);
  auto ts = run_unit(*g.unit);
  ts.pop_back();
  CHECK(code([&] { q.submit(w, g.unit->unit_id, ts, 0, t0); }) == "invalid_result");
  auto wrong = run_unit(units10()[1]);
  CHECK(code([&] { q.submit(w, g.unit->unit_id, wrong, 0, t0); }) == "invalid_result");
  CHECK(q.status(t0).completed == 0);
}

TEST_CASE("queue: expired leases return to the queue, then poison") {
  QueueConfig cfg;
  cfg.lease_deadline = 1000ms;
  cfg.max_retries = 3;
  std::vector<WorkUnit> one = {units10()[0]};
  WorkQueue q(one, cfg);
  const auto w = q.register_worker("a");
  auto t = Clock::now();
  for (int attempt = 0; attempt < 4; ++attempt) {
    const auto g = q.lease(w, t);
    REQUIRE(g.unit);
    CHECK(!q.lease(w, t).unit);
    t += 1001ms;
    const auto s = q.status(t);
    CHECK(s.in_flight == 0);
    CHECK(s.queued == (attempt < 3 ? 1u : 0u));
  }
  CHECK(q.poisoned() == std::vector<std::string>{one[0].unit_id});
  const auto g = q.lease(w, t);
  CHECK(!g.unit);
  CHECK(g.drained);
  CHECK(q.results().empty());
}

TEST_CASE("queue: late result from an expired lease is kept once") {
  QueueConfig cfg;
  cfg.lease_deadline = 1000ms;
  std::vector<WorkUnit> one = {units10()[0]};
  std::vector<std::string> ingested;
  WorkQueue q(one, cfg, [&](const WorkUnit& u, const auto&) { ingested.push_back(u.unit_id); });
  const auto a = q.register_worker("a");
  const auto b = q.register_worker("b");
  auto t = Clock::now();
  REQUIRE(q.lease(a, t).unit);
  t += 2000ms;
  REQUIRE(q.lease(b, t).unit);
  CHECK(q.submit(a, one[0].unit_id, run_unit(one[0]), 0, t) == Ack::kAccepted);
  CHECK(q.submit(b, one[0].unit_id, run_unit(one[0]), 0, t) == Ack::kDuplicate);
  CHECK(ingested.size() == 1);
  CHECK(q.drained());
  CHECK(q.results().size() == 2);
}

TEST_CASE("queue: failure reports re-queue, stale reports are ignored") {
  std::vector<WorkUnit> one = {units10()[0]};
  WorkQueue q(one, {});
  const auto a = q.register_worker("a");
  const auto b = q.register_worker("b");
  const auto t = Clock::now();
  REQUIRE(q.lease(a, t).unit);
  q.report_failure(b, one[0].unit_id, "not mine", t);
  CHECK(q.status(t).in_flight == 1);
  q.report_failure(a, one[0].unit_id, "boom", t);
  CHECK(q.status(t).queued == 1);
}

TEST_CASE("single worker drains 10 units in lease order") {
  TempDir tmp("single");
  std::vector<env::Task> tasks;
  for (const auto& u : units10()) tasks.push_back(u.task);
  auto run = store::Run::create(tmp.path, "r", "rollout", {}, tasks);
  Master m(units10(), {}, &run);
  m.start();
  WorkerOptions wo;
  wo.master_url = m.url();
  const auto st = run_worker(cat(), wo);
  m.stop();
  CHECK(st.leased == 10);
  CHECK(st.accepted == 10);
  CHECK(m.queue().arrival_order() == m.queue().lease_order());
  CHECK(m.queue().arrival_order().size() == 10);
  const auto loaded = store::load_trajectories(tmp.path);
  CHECK(loaded.records.size() == 20);
}

TEST_CASE("one worker and four workers give the same trajectories") {
  LocalBackend local(cat());
  HttpBackend one(cat(), 1);
  HttpBackend four(cat(), 4);
  const auto ref = local.run(units10());
  CHECK(one.run(units10()) == ref);
  CHECK(digests(four.run(units10())) == digests(ref));
}

TEST_CASE("dead worker's unit is re-leased and duplicates are discarded") {
  TempDir tmp("faults");
  std::vector<env::Task> tasks;
  for (const auto& u : units10()) tasks.push_back(u.task);
  auto run = store::Run::create(tmp.path, "r", "rollout", {}, tasks);
  MasterOptions mo;
  mo.queue.lease_deadline = 300ms;
  mo.queue.retry_after = 20ms;
  Master m(units10(), mo, &run);
  m.start();
  WorkerOptions dying;
  dying.master_url = m.url();
  dying.faults.die_after_leases = 1;
  const auto d = run_worker(cat(), dying);
  CHECK(d.died);
  CHECK(d.accepted == 1);
  WorkerOptions replaying;
  replaying.master_url = m.url();
  replaying.faults.duplicate_rate = 1.0;
  const auto r = run_worker(cat(), replaying);
  CHECK(m.wait_drained(1s));
  m.stop();
  CHECK(r.duplicates_sent == r.accepted);
  CHECK(r.duplicate_acks == r.accepted);
  CHECK(r.accepted == 9);
  const auto s = m.queue().status(Clock::now());
  CHECK(s.completed == 10);
  CHECK(s.poisoned == 0);
  LocalBackend local(cat());
  CHECK(m.queue().results() == local.run(units10()));
  const auto loaded = store::load_trajectories(tmp.path);
  std::set<std::pair<std::string, int>> keys;
  for (const auto& rec : loaded.records) keys.insert({rec.trajectory.unit_id, rec.trajectory.sample});
  CHECK(loaded.records.size() == 20);
  CHECK(keys.size() == 20);
}

TEST_CASE("http: malformed requests get machine-readable 4xx") {
  Master m(units10(), {});
  m.start();
  httplib::Client c(m.url());
  auto r = c.Post("/lease", schema(), "{not json", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(nlohmann::json::parse(r->body).at("error") == "malformed_request");
  r = c.Post("/register", "{}", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  CHECK(nlohmann::json::parse(r->body).at("error") == "schema_mismatch");
  r = c.Post("/lease", schema(), R"({"worker_id":"ghost"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 404);
  r = c.Post("/lease", schema(), R"({})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);
  r = c.Post("/result", schema(), R"({"worker_id":"w0","unit_id":"u0000","trajectories":[]})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 404);
  r = c.Get("/status");
  REQUIRE(r);
  CHECK(r->status == 200);
  const auto s = nlohmann::json::parse(r->body);
  CHECK(s.at("queued") == 10);
  CHECK(s.at("completed") == 0);
  CHECK(s.at("drained") == false);
  m.stop();
}

TEST_CASE("worker started before the master connects after retries") {
  Master probe({}, {});
  const int port = probe.start();
  probe.stop();
  MasterOptions mo;
  mo.port = port;
  std::vector<WorkUnit> two(units10().begin(), units10().begin() + 2);
  WorkerStats st;
  std::thread w([&] {
    WorkerOptions wo;
    wo.master_url = "http://127.0.0.1:" + std::to_string(port);
    wo.connect_attempts = 20;
    wo.backoff_initial = 20ms;
    wo.backoff_max = 200ms;
    st = run_worker(cat(), wo);
  });
  std::this_thread::sleep_for(150ms);
  Master m(two, mo);
  m.start();
  w.join();
  m.stop();
  CHECK(st.accepted == 2);
}

TEST_CASE("unreachable master: bounded retry then error") {
  Master probe({}, {});
  const int port = probe.start();
  probe.stop();
  WorkerOptions wo;
  wo.master_url = "http://127.0.0.1:" + std::to_string(port);
  wo.connect_attempts = 3;
  wo.backoff_initial = 5ms;
  try {
    run_worker(cat(), wo);
    FAIL("expected master_unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == "master_unreachable");
  }
}

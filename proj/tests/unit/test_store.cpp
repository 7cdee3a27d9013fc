#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>

#include "coda/store/run.hpp"
#include "fixtures.hpp"

using namespace coda;
using namespace coda::store;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("coda_store_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const testing::Corpus& corpus() {
  static const testing::Corpus c = testing::mixed_corpus(3, 3);
  return c;
}

}  // namespace

TEST_CASE("trajectory json round-trip") {
  for (const auto& t : corpus().trajectories) {
    CHECK(trajectory_from_json(to_json(t)) == t);
    CHECK(trajectory_from_json(nlohmann::json::parse(to_json(t).dump())) == t);
  }
  judge::JudgeVerdict v{false, {1, 4}, 3};
  CHECK(verdict_from_json(to_json(v)) == v);
  CHECK(verdict_from_json(to_json(judge::JudgeVerdict{true, {}, {}})) == judge::JudgeVerdict{true, {}, {}});
}

TEST_CASE("append, read back, close") {
  TempDir tmp("append");
  auto run = Run::create(tmp.path, "r1", "eval", {{"k", 8}}, corpus().tasks);
  const auto& ts = corpus().trajectories;
  CHECK(run.append_trajectory(ts[0]) == 0);
  CHECK(run.append_trajectory(ts[1]) == 1);
  const auto loaded = load_trajectories(tmp.path);
  REQUIRE(loaded.records.size() == 2);
  CHECK(loaded.records[1].trajectory == ts[1]);
  CHECK(loaded.quarantined == 0);
  CHECK(read_tasks(tmp.path) == corpus().tasks);
  run.append_verdict(0, {true, {}, {}});
  run.append_verdict(1, {false, {}, 2});
  run.close();
  CHECK_THROWS_AS(run.append_trajectory(ts[2]), ClosedRun);
  const auto m = read_manifest(tmp.path);
  CHECK(m.counts.trajectories == 2);
  CHECK(m.counts.clean == 1);
  CHECK(m.closed);
  CHECK(!m.code_version.empty());
  CHECK(verify(tmp.path, env::Catalog::builtin()).ok);
}

TEST_CASE("torn final line is quarantined") {
  TempDir tmp("torn");
  {
    auto run = Run::create(tmp.path, "r2", "eval", {}, corpus().tasks);
    for (int i = 0; i < 3; ++i) run.append_trajectory(corpus().trajectories[i]);
  }
  const fs::path log = tmp.path / "trajectories.jsonl";
  const auto size = fs::file_size(log);
  fs::resize_file(log, size - 40);
  const auto loaded = load_trajectories(tmp.path);
  CHECK(loaded.records.size() == 2);
  CHECK(loaded.quarantined == 1);

  auto run = Run::open(tmp.path);
  CHECK(load_trajectories(tmp.path).quarantined == 0);
  CHECK(fs::exists(tmp.path / "trajectories.quarantine"));
  CHECK(run.append_trajectory(corpus().trajectories[2]) == 2);
  CHECK(load_trajectories(tmp.path).records.size() == 3);
}

TEST_CASE("filter_clean") {
  TempDir tmp("clean");
  auto run = Run::create(tmp.path, "r3", "stage1:algebra", {}, corpus().tasks);
  std::set<long> expected;
  for (int i = 0; i < 10; ++i) {
    const long id = run.append_trajectory(corpus().trajectories[i]);
    judge::JudgeVerdict v{true, {}, {}};
    if (i % 10 >= 3) v = (i % 3 == 0) ? judge::JudgeVerdict{true, {1}, {}} : judge::JudgeVerdict{false, {}, {}};
    if (i < 3) expected.insert(id);
    run.append_verdict(id, v);
  }
  const auto clean = filter_clean(tmp.path);
  std::set<long> got;
  for (const auto& c : clean) {
    got.insert(c.id);
    CHECK(c.positives.size() == c.trajectory.steps.size());
  }
  CHECK(got == expected);

  TempDir empty("empty");
  Run::create(empty.path, "r4", "eval", {}, {});
  CHECK(filter_clean(empty.path).empty());

  std::vector<Record> recs = {{0, corpus().trajectories[0]}, {1, corpus().trajectories[1]}};
  try {
    filter_clean(recs, {{0, judge::JudgeVerdict{true, {}, {}}}});
    FAIL("expected MissingVerdicts");
  } catch (const MissingVerdicts& e) {
    CHECK(e.ids() == std::vector<long>{1});
  }
}

TEST_CASE("verify detects tampering") {
  TempDir tmp("verify");
  {
    auto run = Run::create(tmp.path, "r5", "eval", {}, corpus().tasks);
    for (const auto& t : corpus().trajectories) run.append_trajectory(t);
    run.close();
  }
  const auto good = verify(tmp.path, env::Catalog::builtin());
  CHECK(good.ok);
  CHECK(good.counts.trajectories == static_cast<long>(corpus().trajectories.size()));

  const fs::path log = tmp.path / "trajectories.jsonl";
  std::ifstream in(log);
  std::string first;
  std::getline(in, first);
  std::string rest((std::istreambuf_iterator<char>(in)), {});
  in.close();
  auto j = nlohmann::json::parse(first);
  j["data"]["oracle_success"] = !j["data"]["oracle_success"].get<bool>();
  std::ofstream(log, std::ios::trunc) << j.dump() << '\n' << rest;
  const auto bad = verify(tmp.path, env::Catalog::builtin());
  CHECK(!bad.ok);
  CHECK(bad.problems.size() == 1);
}

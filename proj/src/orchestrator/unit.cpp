#include "coda/orchestrator/unit.hpp"

#include <algorithm>
#include <map>

#include "coda/agent/checkpoint.hpp"
#include "coda/common/rng.hpp"
#include "coda/env/serialize.hpp"
#include "coda/pipeline/episode.hpp"

namespace coda::orchestrator {

using nlohmann::json;

json to_json(const WorkUnit& u) {
  return {{"unit_id", u.unit_id},
          {"task", env::to_json(u.task)},
          {"policy", u.policy},
          {"checkpoint", u.checkpoint},
          {"spec",
           {{"samples", u.spec.samples},
            {"seed", u.spec.seed},
            {"resolution", {u.spec.resolution.width, u.spec.resolution.height}},
            {"sigma", u.spec.noise.sigma},
            {"p_miss", u.spec.noise.p_miss},
            {"temperature", u.spec.temperature}}}};
}

WorkUnit unit_from_json(const json& j) {
  WorkUnit u;
  u.unit_id = j.at("unit_id").get<std::string>();
  u.task = env::task_from_json(j.at("task"));
  u.policy = j.at("policy").get<std::string>();
  u.checkpoint = j.at("checkpoint").get<std::string>();
  const auto& s = j.at("spec");
  u.spec.samples = s.at("samples").get<int>();
  u.spec.seed = s.at("seed").get<std::uint64_t>();
  u.spec.resolution = {s.at("resolution").at(0).get<int>(), s.at("resolution").at(1).get<int>()};
  u.spec.noise.sigma = s.at("sigma").get<double>();
  u.spec.noise.p_miss = s.at("p_miss").get<double>();
  u.spec.temperature = s.at("temperature").get<double>();
  return u;
}

std::vector<store::Trajectory> execute_unit(const env::Catalog& catalog, const WorkUnit& unit) {
  std::unique_ptr<pipeline::Policy> policy;
  if (unit.policy == "oracle") {
    policy = std::make_unique<pipeline::OraclePolicy>();
  } else if (unit.policy == "planner") {
    policy = std::make_unique<pipeline::PlannerPolicy>(agent::checkpoint_from_string(unit.checkpoint),
                                                       unit.spec.temperature);
  } else {
    throw Error("invalid_unit", "unknown policy kind " + unit.policy);
  }
  std::vector<store::Trajectory> out;
  for (int s = 0; s < unit.spec.samples; ++s) {
    pipeline::EpisodeSpec e;
    e.unit_id = unit.unit_id;
    e.sample = s;
    e.policy_seed = derive_seed(unit.spec.seed, {static_cast<std::uint64_t>(s), 1});
    e.executor_seed = derive_seed(unit.spec.seed, {static_cast<std::uint64_t>(s), 2});
    e.resolution = unit.spec.resolution;
    e.noise = unit.spec.noise;
    out.push_back(pipeline::run_episode(catalog, unit.task, *policy, e));
  }
  return out;
}

std::vector<store::Trajectory> aggregate(std::vector<store::Trajectory> trajectories,
                                         const std::vector<WorkUnit>& units) {
  std::map<std::string, int> expected;
  for (const auto& u : units) expected[u.unit_id] = u.spec.samples;
  std::map<std::string, int> seen;
  for (const auto& t : trajectories) {
    if (!expected.count(t.unit_id)) throw Error("unknown_unit", "trajectory for unknown unit " + t.unit_id);
    seen[t.unit_id]++;
  }
  std::string missing;
  for (const auto& [id, n] : expected) {
    if (seen[id] != n) missing += " " + id;
  }
  if (!missing.empty()) throw Error("incomplete_run", "missing or partial units:" + missing);
  std::sort(trajectories.begin(), trajectories.end(), [](const store::Trajectory& a, const store::Trajectory& b) {
    return a.unit_id != b.unit_id ? a.unit_id < b.unit_id : a.sample < b.sample;
  });
  for (std::size_t i = 1; i < trajectories.size(); ++i) {
    if (trajectories[i].unit_id == trajectories[i - 1].unit_id && trajectories[i].sample == trajectories[i - 1].sample) {
      throw Error("duplicate_result", "unit " + trajectories[i].unit_id + " sample aggregated twice");
    }
  }
  return trajectories;
}

std::vector<store::Trajectory> LocalBackend::run(const std::vector<WorkUnit>& units) {
  std::vector<store::Trajectory> all;
  for (const auto& u : units) {
    auto ts = execute_unit(*catalog_, u);
    all.insert(all.end(), std::make_move_iterator(ts.begin()), std::make_move_iterator(ts.end()));
  }
  return aggregate(std::move(all), units);
}

}  // namespace coda::orchestrator

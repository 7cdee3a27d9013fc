#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "coda/common/rng.hpp"
#include "coda/env/catalog.hpp"
#include "coda/agent/checkpoint.hpp"
#include "coda/env/task.hpp"
#include "coda/orchestrator/unit.hpp"
#include "coda/pipeline/episode.hpp"

namespace coda::testing {

struct Corpus {
  std::vector<env::Task> tasks;
  std::vector<store::Trajectory> trajectories;
};

// Mixed trajectories over every built-in application: clean oracle runs,
// oracle runs with sloppy grounding, and untrained-planner runs.
inline Corpus mixed_corpus(std::uint64_t seed, int tasks_per_app) {
  const auto& cat = env::Catalog::builtin();
  Corpus c;
  const pipeline::OraclePolicy oracle;
  const pipeline::PlannerPolicy random_planner(agent::PlannerParams{});
  std::uint64_t unit = 0;
  for (const auto& sw : cat.names()) {
    const auto tasks = env::generate_tasks(cat, sw, env::builtin_templates(), tasks_per_app, derive_seed(seed, {hash_string(sw)}));
    for (const auto& task : tasks) {
      c.tasks.push_back(task);
      for (int variant = 0; variant < 3; ++variant) {
        pipeline::EpisodeSpec spec;
        spec.unit_id = task.id;
        spec.sample = variant;
        spec.policy_seed = derive_seed(seed, {unit, 1});
        spec.executor_seed = derive_seed(seed, {unit, 2});
        ++unit;
        const pipeline::Policy* policy = &oracle;
        if (variant == 0) spec.noise = {0.0, 0.0};
        if (variant == 1) spec.noise = {2.0, 0.35};
        if (variant == 2) policy = &random_planner;
        c.trajectories.push_back(pipeline::run_episode(cat, task, *policy, spec));
      }
    }
  }
  return c;
}

// Planner work units over every built-in application, all seeds fixed.
inline std::vector<orchestrator::WorkUnit> work_units(std::uint64_t seed, int count, int samples) {
  const auto& cat = env::Catalog::builtin();
  const auto names = cat.names();
  const std::string ckpt = agent::checkpoint_to_string(agent::base_params());
  std::vector<orchestrator::WorkUnit> out;
  const int per_app = (count + static_cast<int>(names.size()) - 1) / static_cast<int>(names.size());
  for (const auto& sw : names) {
    const auto tasks = env::generate_tasks(cat, sw, env::builtin_templates(), per_app, derive_seed(seed, {hash_string(sw)}));
    for (const auto& task : tasks) {
      if (static_cast<int>(out.size()) == count) break;
      orchestrator::WorkUnit u;
      char id[16];
      std::snprintf(id, sizeof id, "u%04zu", out.size());
      u.unit_id = id;
      u.task = task;
      u.checkpoint = ckpt;
      u.spec.samples = samples;
      u.spec.seed = derive_seed(seed, {out.size(), 7});
      out.push_back(u);
    }
  }
  return out;
}

}  // namespace coda::testing

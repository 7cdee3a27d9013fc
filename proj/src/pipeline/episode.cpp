#include "coda/pipeline/episode.hpp"

#include "coda/common/rng.hpp"
#include "coda/env/goal.hpp"
#include "coda/env/solver.hpp"

namespace coda::pipeline {

Plan PlannerPolicy::decide(const StepInput& in, std::uint64_t seed) const {
  return agent::sample_plan(agent::PlanDistribution(params_, in.context, temperature_), seed).plan;
}

Plan OraclePolicy::decide(const StepInput& in, std::uint64_t) const {
  const auto& task = in.context.task();
  // The state passed in is the pre-action state; the ordered progress needs
  // the visited states, which the oracle reconstructs from the history.
  std::vector<env::WorldState> visited = {in.model.initial_state()};
  for (const auto& h : in.context.history()) visited.push_back(in.model.step(visited.back(), h.action));
  const auto path = env::solve(in.model, task.goal, in.state, env::ordered_progress(in.model, task.goal, visited));
  if (!path || path->empty()) return Plan{ActionKind::kFinish, kNoTarget, "", "goal reached"};
  return path->front();
}

store::Trajectory run_episode(const env::Catalog& catalog, const env::Task& task, const Policy& policy,
                              const EpisodeSpec& spec) {
  const auto& model = catalog.model(task.software);
  const int slot = catalog.slot(task.software);
  store::Trajectory traj;
  traj.unit_id = spec.unit_id;
  traj.sample = spec.sample;
  traj.task_id = task.id;
  traj.software = task.software;
  traj.policy_version = policy.version();
  traj.policy_seed = spec.policy_seed;
  traj.executor_seed = spec.executor_seed;
  traj.env_seed = task.seed;
  traj.resolution = spec.resolution;
  traj.max_steps = task.max_steps;

  env::WorldState state = model.initial_state();
  std::vector<env::WorldState> visited = {state};
  env::Observation current = env::render(model, state, spec.resolution);
  env::Observation previous = current;
  History history;
  for (int t = 0; t < task.max_steps; ++t) {
    const agent::DecisionContext ctx(task, history, previous, current, slot);
    const StepInput in{model, state, ctx};
    const Plan plan = policy.decide(in, derive_seed(spec.policy_seed, {static_cast<std::uint64_t>(t)}));
    const auto g = agent::ground(plan, current, spec.noise, derive_seed(spec.executor_seed, {static_cast<std::uint64_t>(t)}));
    traj.steps.push_back({env::digest(current), plan, g.action, g.failure});
    state = model.step(state, g.action);
    visited.push_back(state);
    history.push_back({plan, g.action});
    if (g.action.kind == ActionKind::kFinish) break;
    previous = current;
    current = env::render(model, state, spec.resolution);
  }
  traj.final_state_digest = env::digest(state);
  traj.oracle_success = env::goal_check(model, state, task.goal, visited);
  return traj;
}

std::unique_ptr<ReplayedStep> replay_to(const env::Catalog& catalog, const env::Task& task,
                                        const store::Trajectory& traj, int t) {
  if (t < 0 || t >= static_cast<int>(traj.steps.size())) throw Error("invalid_argument", "step out of range");
  const auto& model = catalog.model(task.software);
  auto r = std::make_unique<ReplayedStep>();
  r->task = task;
  r->state = model.initial_state();
  r->current = env::render(model, r->state, traj.resolution);
  r->previous = r->current;
  for (int i = 0; i < t; ++i) {
    const auto& s = traj.steps[i];
    r->state = model.step(r->state, s.action);
    r->history.push_back({s.plan, s.action});
    r->previous = r->current;
    r->current = env::render(model, r->state, traj.resolution);
  }
  r->context = std::make_unique<agent::DecisionContext>(r->task, r->history, r->previous, r->current,
                                                        catalog.slot(task.software));
  return r;
}

}  // namespace coda::pipeline

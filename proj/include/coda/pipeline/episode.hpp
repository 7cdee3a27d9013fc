#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "coda/agent/executor.hpp"
#include "coda/agent/planner.hpp"
#include "coda/env/catalog.hpp"
#include "coda/store/trajectory.hpp"

namespace coda::pipeline {

// Everything visible at one decision. Planner policies read only the
// context; scripted policies may read the true state.
struct StepInput {
  const env::SoftwareModel& model;
  const env::WorldState& state;
  const agent::DecisionContext& context;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Plan decide(const StepInput& in, std::uint64_t seed) const = 0;
  virtual std::string version() const = 0;
};

class PlannerPolicy final : public Policy {
 public:
  explicit PlannerPolicy(agent::PlannerParams params, double temperature = 1.0)
      : params_(std::move(params)), temperature_(temperature) {}
  Plan decide(const StepInput& in, std::uint64_t seed) const override;
  std::string version() const override { return params_.version; }
  const agent::PlannerParams& params() const { return params_; }

 private:
  agent::PlannerParams params_;
  double temperature_;
};

// Follows a shortest solver path on the true state; finishes when the goal
// holds or no path exists.
class OraclePolicy final : public Policy {
 public:
  Plan decide(const StepInput& in, std::uint64_t seed) const override;
  std::string version() const override { return "oracle"; }
};

struct EpisodeSpec {
  std::string unit_id;
  int sample = 0;
  std::uint64_t policy_seed = 0;
  std::uint64_t executor_seed = 0;
  env::Resolution resolution{1280, 800};
  agent::GroundingNoise noise;
};

store::Trajectory run_episode(const env::Catalog& catalog, const env::Task& task, const Policy& policy,
                              const EpisodeSpec& spec);

// Decision context at step `t` of a logged trajectory, rebuilt by replaying
// its actions. Owns the objects the context points to.
struct ReplayedStep {
  env::Task task;
  History history;
  env::Observation previous;
  env::Observation current;
  env::WorldState state;
  std::unique_ptr<agent::DecisionContext> context;
};

std::unique_ptr<ReplayedStep> replay_to(const env::Catalog& catalog, const env::Task& task,
                                        const store::Trajectory& traj, int t);

}  // namespace coda::pipeline

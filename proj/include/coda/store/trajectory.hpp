#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "coda/agent/plan.hpp"
#include "coda/env/types.hpp"
#include "coda/judge/verdict.hpp"

namespace coda::store {

struct Step {
  std::string observation_digest;  // planner's view before acting
  Plan plan;
  Action action;
  bool grounding_failure = false;

  friend bool operator==(const Step&, const Step&) = default;
};

struct Trajectory {
  std::string unit_id;
  int sample = 0;
  std::string task_id;
  std::string software;
  std::string policy_version;
  std::uint64_t policy_seed = 0;
  std::uint64_t executor_seed = 0;
  std::uint64_t env_seed = 0;
  env::Resolution resolution{1280, 800};
  int max_steps = 15;
  std::vector<Step> steps;
  std::string final_state_digest;
  bool oracle_success = false;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

nlohmann::json to_json(const Plan& p);
Plan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Action& a);
Action action_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);
nlohmann::json to_json(const judge::JudgeVerdict& v);
judge::JudgeVerdict verdict_from_json(const nlohmann::json& j);

// Digest of the canonical serialization; identifies a trajectory.
std::string digest(const Trajectory& t);

}  // namespace coda::store

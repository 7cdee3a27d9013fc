#pragma once

#include <optional>
#include <vector>

#include "coda/agent/plan.hpp"
#include "coda/env/goal.hpp"
#include "coda/env/software.hpp"

namespace coda::env {

// Exact action for a plan executed without grounding noise.
Action perfect_action(const SoftwareModel& model, const WorldState& state, const Plan& plan);

// Number of subgoals matched so far for each ordered atom of `goal`, given
// the states visited (oldest first).
std::vector<int> ordered_progress(const SoftwareModel& model, const GoalPredicate& goal,
                                  const std::vector<WorldState>& visited);

struct SolverLimits {
  int max_depth = 14;
  std::size_t max_nodes = 200000;
};

// Breadth-first search over the transition graph from `start`. Returns a
// shortest plan sequence (finish excluded) that satisfies the goal, or
// nullopt when none exists within the limits. An empty vector means the goal
// already holds. States are deduplicated on their projection onto the goal's
// widgets, the screen, the focus, and open menus, which is exact for the
// built-in transition semantics.
std::optional<std::vector<Plan>> solve(const SoftwareModel& model, const GoalPredicate& goal,
                                       const WorldState& start, std::vector<int> progress,
                                       SolverLimits limits = {});

}  // namespace coda::env

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coda/env/goal.hpp"

namespace coda::env {

inline constexpr int kDefaultMaxSteps = 15;

struct Task {
  std::string id;
  std::string template_id;
  std::string instruction;
  std::string software;
  GoalPredicate goal;
  int max_steps = kDefaultMaxSteps;
  std::uint64_t seed = 0;

  friend bool operator==(const Task&, const Task&) = default;
};

// Template ids understood by the generator.
const std::vector<std::string>& builtin_templates();

class Catalog;

// Procedurally instantiates `n` tasks for `software`. Every emitted goal has a
// witness path found by breadth-first search within max_steps - 1 actions
// (one step is reserved for finish). Deterministic in `seed`.
std::vector<Task> generate_tasks(const Catalog& catalog, const std::string& software,
                                 const std::vector<std::string>& templates, int n,
                                 std::uint64_t seed, int max_steps = kDefaultMaxSteps);

}  // namespace coda::env

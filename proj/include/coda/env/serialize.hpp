#pragma once

#include <nlohmann/json.hpp>

#include "coda/env/software.hpp"
#include "coda/env/task.hpp"

namespace coda::env {

nlohmann::json to_json(const GoalAtom& a);
GoalAtom atom_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GoalPredicate& g);
GoalPredicate goal_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Task& t);
Task task_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WorldState& s);
WorldState state_from_json(const nlohmann::json& j);

// A task suite file: {"tasks": [...]}.
std::vector<Task> load_suite(const std::string& path);
void save_suite(const std::string& path, const std::vector<Task>& tasks);

}  // namespace coda::env

#pragma once

#include <filesystem>
#include <string>

#include "coda/agent/planner.hpp"

namespace coda::agent {

class CheckpointError : public Error {
 public:
  explicit CheckpointError(const std::string& m) : Error("checkpoint_error", m) {}
};

std::string checkpoint_to_string(const PlannerParams& params);
PlannerParams checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const PlannerParams& params);
PlannerParams load_checkpoint(const std::filesystem::path& path);

}  // namespace coda::agent

#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "coda/agent/executor.hpp"
#include "coda/env/catalog.hpp"
#include "coda/env/task.hpp"
#include "coda/store/trajectory.hpp"

namespace coda::orchestrator {

struct RolloutSpec {
  int samples = 1;
  std::uint64_t seed = 0;  // per-sample seeds derive from this
  env::Resolution resolution{1280, 800};
  agent::GroundingNoise noise;
  double temperature = 1.0;

  friend bool operator==(const RolloutSpec&, const RolloutSpec&) = default;
};

// A self-contained job: the task, the policy to run, and all seeds.
struct WorkUnit {
  std::string unit_id;
  env::Task task;
  std::string policy = "planner";  // "planner" | "oracle"
  std::string checkpoint;          // planner checkpoint text
  RolloutSpec spec;

  friend bool operator==(const WorkUnit&, const WorkUnit&) = default;
};

nlohmann::json to_json(const WorkUnit& u);
WorkUnit unit_from_json(const nlohmann::json& j);

// Runs every sample of a unit in order. Pure given the unit.
std::vector<store::Trajectory> execute_unit(const env::Catalog& catalog, const WorkUnit& unit);

// Sorts by (unit id, sample) and checks each unit appears with exactly its
// sample count. Throws Error("incomplete_run") naming missing units.
std::vector<store::Trajectory> aggregate(std::vector<store::Trajectory> trajectories,
                                         const std::vector<WorkUnit>& units);

class RolloutBackend {
 public:
  virtual ~RolloutBackend() = default;
  // Aggregated trajectories, sorted by (unit id, sample).
  virtual std::vector<store::Trajectory> run(const std::vector<WorkUnit>& units) = 0;
};

// Executes units sequentially in the calling thread.
class LocalBackend final : public RolloutBackend {
 public:
  explicit LocalBackend(const env::Catalog& catalog) : catalog_(&catalog) {}
  std::vector<store::Trajectory> run(const std::vector<WorkUnit>& units) override;

 private:
  const env::Catalog* catalog_;
};

}  // namespace coda::orchestrator

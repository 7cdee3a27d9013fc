#pragma once

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "coda/agent/planner.hpp"
#include "coda/env/catalog.hpp"
#include "coda/orchestrator/unit.hpp"
#include "coda/pipeline/config.hpp"
#include "coda/store/run.hpp"

namespace coda::pipeline {

// Task suites, each drawn from its own seed stream.
std::vector<env::Task> train_tasks(const env::Catalog& catalog, const std::string& software, const PipelineConfig& c);
std::vector<env::Task> eval_tasks(const env::Catalog& catalog, const std::string& software, const PipelineConfig& c);
std::vector<env::Task> collect_tasks(const env::Catalog& catalog, const std::string& software,
                                     const PipelineConfig& c);

struct PolicyRef {
  std::string kind = "planner";
  std::string checkpoint;

  static PolicyRef planner(const agent::PlannerParams& params);
  static PolicyRef oracle();
};

struct SoftwareScore {
  std::string software;
  int tasks = 0;
  double average = 0.0;  // Average@k
  double pass = 0.0;     // Pass@k
};

struct EvalReport {
  int k = 0;
  std::vector<SoftwareScore> per_software;
  double overall_average = 0.0;  // unweighted mean over software
  double overall_pass = 0.0;
  double task_weighted_average = 0.0;
  double task_weighted_pass = 0.0;

  nlohmann::json to_json() const;
  std::string to_text(const std::string& title) const;
};

// Attempts every task k times with distinct seeds.
EvalReport evaluate(const env::Catalog& catalog, const PolicyRef& policy, const std::vector<env::Task>& suite, int k,
                    const PipelineConfig& config, orchestrator::RolloutBackend& backend, std::uint64_t seed);

struct IterationMetrics {
  int iteration = 0;
  int trajectories = 0;
  int oracle_successes = 0;
  int clean = 0;
  int labeled_steps = 0;
  double mean_reward = 0.0;
  double loss = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  double advantage_std = 0.0;
  bool skipped = false;

  nlohmann::json to_json() const;
};

struct Stage1Result {
  agent::PlannerParams params;
  std::vector<IterationMetrics> iterations;
};

Stage1Result stage1_train(const env::Catalog& catalog, const std::string& software, const PipelineConfig& config,
                          orchestrator::RolloutBackend& backend);

struct PooledData {
  std::vector<env::Task> tasks;
  std::vector<store::LabeledTrajectory> trajectories;  // software order, then record order
  std::map<std::string, int> per_software;
};

PooledData collect_specialist_data(const env::Catalog& catalog,
                                   const std::map<std::string, agent::PlannerParams>& specialists,
                                   const PipelineConfig& config, orchestrator::RolloutBackend& backend);

struct SftResult {
  agent::PlannerParams params;
  std::vector<double> epoch_loss;  // mean NLL before each epoch's step, then final
};

SftResult stage2_sft(const env::Catalog& catalog, const PooledData& data, const PipelineConfig& config);

}  // namespace coda::pipeline

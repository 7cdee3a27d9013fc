#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "coda/agent/executor.hpp"
#include "coda/judge/judge.hpp"
#include "coda/rlcore/grpo.hpp"

namespace coda::pipeline {

struct TaskConfig {
  std::vector<std::string> templates;  // empty = all built-in templates
  int train_per_software = 40;
  int eval_per_software = 30;
  int collect_per_software = 40;
  int max_steps = 15;
};

struct Stage1Config {
  int iterations = 60;
  int tasks_per_iteration = 40;
  int samples_per_task = 32;
  int updates_per_iteration = 4;  // gradient passes over the iteration's groups
  rlcore::GrpoConfig grpo;
};

struct Stage2Config {
  int samples_per_task = 8;
  int epochs = 150;
  double learning_rate = 2.0;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string catalog;  // path to a catalog file; empty = built-in
  std::string output_dir;  // empty = keep nothing on disk
  env::Resolution planner_resolution{1280, 800};
  double temperature = 1.0;
  agent::GroundingNoise executor;
  TaskConfig tasks;
  judge::JudgeEvalConfig judge;  // first strategy is used for filtering
  Stage1Config stage1;
  Stage2Config stage2;
  int eval_k = 8;
  int workers = 1;  // >1 runs rollouts through the HTTP master

  static PipelineConfig defaults();
  // Missing keys keep their defaults; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::string& path);
  nlohmann::json to_json() const;

  const judge::Strategy& filter_strategy() const;
  std::vector<std::string> templates() const;
};

}  // namespace coda::pipeline

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "coda/agent/planner.hpp"
#include "coda/env/types.hpp"

namespace coda::rlcore {

struct GrpoConfig {
  double clip_epsilon = 0.2;
  double kl_beta = 0.01;
  int group_size = 8;
  double learning_rate = 2.0;
  double std_epsilon = 1e-8;

  void validate() const;  // throws Error("invalid_config")
};

// Distance term in [0, 1]. Kinds must match.
double dist_reward(const Action& candidate, const Action& positive, env::Resolution native = {1280, 800});

// Type indicator plus distance term, in [0, 2]; 0 on kind mismatch.
double action_reward(const Action& candidate, const Action& positive, env::Resolution native = {1280, 800});

// Levenshtein distance over bytes.
std::size_t edit_distance(const std::string& a, const std::string& b);

// (r - mean) / population std; all zeros when std < std_epsilon.
std::vector<double> group_advantages(const std::vector<double>& rewards, double std_epsilon = 1e-8);

// u - 1 - log u with u = prob_ref / prob_theta.
double kl_value(double prob_theta, double prob_ref);

// One sampled plan of a group, evaluated under theta and the reference
// policy. token_grads[t] is d/dtheta log of token t's conditional under theta.
struct GroupMember {
  std::vector<double> probs;
  std::vector<double> ref_probs;
  std::vector<std::vector<double>> token_grads;
  double advantage = 0.0;
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> gradient;
  double mean_kl = 0.0;        // mean over tokens
  double clip_fraction = 0.0;  // fraction of tokens whose clipped branch is active
  int tokens = 0;
};

LossResult grpo_loss(const std::vector<GroupMember>& group, const GrpoConfig& config);

// Same objective without the min/clip; used to check clipping inertness.
LossResult unclipped_loss(const std::vector<GroupMember>& group, const GrpoConfig& config);

// Evaluates plans under theta and ref on one decision context.
std::vector<GroupMember> make_group(const agent::PlannerParams& theta, const agent::PlannerParams& ref,
                                    const agent::DecisionContext& context, const std::vector<Plan>& plans,
                                    const std::vector<double>& advantages, double temperature = 1.0);

agent::PlannerParams sgd_step(const agent::PlannerParams& params, const std::vector<double>& gradient,
                              double learning_rate);

struct StepMetrics {
  long step = 0;
  double loss = 0.0;
  double mean_reward = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  double advantage_std = 0.0;
};

// Append-only JSONL training metrics. One object per line:
// {"step","loss","mean_reward","kl","clip_fraction","advantage_std"}.
class MetricsLog {
 public:
  explicit MetricsLog(const std::filesystem::path& path);
  void append(const StepMetrics& m);

 private:
  std::ofstream out_;
};

}  // namespace coda::rlcore

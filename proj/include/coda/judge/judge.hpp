#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coda/env/catalog.hpp"
#include "coda/env/task.hpp"
#include "coda/judge/verdict.hpp"
#include "coda/store/trajectory.hpp"

namespace coda::judge {

struct JudgeProfile {
  std::string id;
  env::Resolution resolution{1280, 800};
  double fp = 0.0;  // P(say success | failed)
  double fn = 0.0;  // P(say failure | succeeded)
  std::uint64_t seed = 0;

  void validate() const;
};

struct VoteSchedule {
  int k = 4;
  // One resolution per round; empty means every round uses each profile's own.
  std::vector<env::Resolution> resolutions;
  std::vector<std::string> ensemble;  // profile ids queried every round

  void validate() const;
};

class UnknownProfile : public Error {
 public:
  explicit UnknownProfile(const std::string& id) : Error("unknown_profile", "unknown judge profile " + id) {}
};

// Judges trajectories of tasks drawn from `tasks`. The noise-free part of a
// verdict depends only on (trajectory, resolution) and is cached; noise is
// drawn per (profile, round, trajectory, trial). Thread-safe.
class Judge {
 public:
  Judge(const env::Catalog& catalog, std::vector<env::Task> tasks);

  // Verdict of a noise-free judge reading frames at `res`.
  JudgeVerdict base_verdict(const store::Trajectory& traj, env::Resolution res) const;

  // The overloads taking `key` expect key == store::digest(traj); they let
  // repeated judging skip re-hashing.
  JudgeVerdict base_verdict(const store::Trajectory& traj, const std::string& key, env::Resolution res) const;
  JudgeVerdict run_schedule(const store::Trajectory& traj, const std::string& key, const VoteSchedule& schedule,
                            const std::vector<JudgeProfile>& profiles, std::uint64_t trial = 0,
                            int* rounds_executed = nullptr) const;
  JudgeVerdict judge_trajectory(const store::Trajectory& traj, const std::string& key, const JudgeProfile& profile,
                                int round = 0, std::uint64_t trial = 0) const;

  JudgeVerdict judge_trajectory(const store::Trajectory& traj, const JudgeProfile& profile, int round = 0,
                                std::uint64_t trial = 0) const;

  // Rounds in ascending resolution; stops at the first failing round.
  JudgeVerdict run_schedule(const store::Trajectory& traj, const VoteSchedule& schedule,
                            const std::vector<JudgeProfile>& profiles, std::uint64_t trial = 0,
                            int* rounds_executed = nullptr) const;

  // Simulator ground truth, replayed from the task's initial state.
  bool oracle_success(const store::Trajectory& traj) const;

  const env::Task& task(const std::string& id) const;

 private:
  JudgeVerdict compute(const store::Trajectory& traj, env::Resolution res) const;
  JudgeVerdict apply_noise(JudgeVerdict base, const JudgeProfile& profile, int round, const std::string& traj_key,
                           std::uint64_t trial) const;

  const env::Catalog* catalog_;
  std::unordered_map<std::string, env::Task> tasks_;
  mutable std::mutex mu_;
  mutable std::map<std::string, JudgeVerdict> cache_;
};

JudgeVerdict unanimous_vote(const std::vector<JudgeVerdict>& verdicts);

// Every action of a clean trajectory; nothing otherwise.
std::optional<std::vector<Action>> label_positive_actions(const store::Trajectory& traj, const JudgeVerdict& verdict);

struct PrecisionRecall {
  std::optional<double> precision;  // absent without positive predictions
  std::optional<double> recall;     // absent without positive truths
  int tp = 0, fp = 0, fn = 0, tn = 0;
};

PrecisionRecall precision_recall(const std::vector<bool>& predicted, const std::vector<bool>& truth);

struct Strategy {
  std::string name;
  VoteSchedule schedule;
};

struct JudgeEvalConfig {
  std::vector<JudgeProfile> profiles;
  std::vector<Strategy> strategies;
  int trials = 1;  // independent noise draws per trajectory

  static JudgeEvalConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ReportRow {
  std::string strategy;
  PrecisionRecall scores;
};

std::vector<ReportRow> evaluate_strategies(const Judge& judge, const std::vector<store::Trajectory>& corpus,
                                           const JudgeEvalConfig& config);

std::string report_text(const std::vector<ReportRow>& rows);
nlohmann::json report_json(const std::vector<ReportRow>& rows);

}  // namespace coda::judge

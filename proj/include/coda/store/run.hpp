#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "coda/env/catalog.hpp"
#include "coda/env/task.hpp"
#include "coda/store/trajectory.hpp"

namespace coda::store {

// Run directory layout:
//   manifest.json       run id, stage, config snapshot, code version, counts
//   tasks.jsonl         the task suite, one task per line
//   trajectories.jsonl  {"type":"trajectory","id":n,"data":{...}} per line
//   verdicts.jsonl      {"type":"verdict","id":n,"data":{...}} per line
inline constexpr int kSchemaVersion = 1;

struct Counts {
  long tasks = 0;
  long trajectories = 0;
  long clean = 0;
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct RunManifest {
  std::string run_id;
  std::string stage;  // stage1:<software> | stage2 | eval | ...
  nlohmann::json config = nlohmann::json::object();
  std::string code_version;
  Counts counts;
  bool closed = false;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

struct Record {
  long id = 0;
  Trajectory trajectory;
};

struct LoadResult {
  std::vector<Record> records;
  int quarantined = 0;  // unparseable lines skipped
};

struct LabeledTrajectory {
  long id = 0;
  Trajectory trajectory;
  std::vector<Action> positives;
};

class ClosedRun : public Error {
 public:
  explicit ClosedRun(const std::string& id) : Error("run_closed", "run " + id + " is closed") {}
};

class MissingVerdicts : public Error {
 public:
  MissingVerdicts(const std::string& msg, std::vector<long> ids) : Error("missing_verdicts", msg), ids_(std::move(ids)) {}
  const std::vector<long>& ids() const { return ids_; }

 private:
  std::vector<long> ids_;
};

// Single writer per run. Every append is flushed before returning.
class Run {
 public:
  static Run create(const std::filesystem::path& dir, const std::string& run_id, const std::string& stage,
                    const nlohmann::json& config, const std::vector<env::Task>& tasks);
  // Opens an existing run for appending. A torn final line is moved to
  // trajectories.quarantine.
  static Run open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const RunManifest& manifest() const { return manifest_; }

  long append_trajectory(const Trajectory& t);
  void append_verdict(long id, const judge::JudgeVerdict& v);
  // Recomputes counts and marks the run closed.
  void close();

 private:
  Run(std::filesystem::path dir, RunManifest m);
  void write_manifest() const;

  std::filesystem::path dir_;
  RunManifest manifest_;
  long next_id_ = 0;
  std::ofstream traj_out_;
  std::ofstream verdict_out_;
};

RunManifest read_manifest(const std::filesystem::path& dir);
std::vector<env::Task> read_tasks(const std::filesystem::path& dir);
LoadResult load_trajectories(const std::filesystem::path& dir);
// Latest verdict per record id.
std::map<long, judge::JudgeVerdict> load_verdicts(const std::filesystem::path& dir);

// Clean trajectories with their positive actions, in record order.
std::vector<LabeledTrajectory> filter_clean(const std::vector<Record>& records,
                                            const std::map<long, judge::JudgeVerdict>& verdicts);
std::vector<LabeledTrajectory> filter_clean(const std::filesystem::path& dir);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> problems;
  Counts counts;
  int quarantined = 0;
};

// Replays every trajectory and checks observation digests, final state
// digests, oracle outcomes, step bounds, and manifest counts.
VerifyReport verify(const std::filesystem::path& dir, const env::Catalog& catalog);

}  // namespace coda::store

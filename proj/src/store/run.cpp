#include "coda/store/run.hpp"

#include <set>
#include <sstream>

#include "coda/common/digest.hpp"
#include "coda/env/goal.hpp"
#include "coda/env/serialize.hpp"
#include "coda/judge/judge.hpp"

namespace coda::store {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kTasks = "tasks.jsonl";
constexpr const char* kTrajectories = "trajectories.jsonl";
constexpr const char* kVerdicts = "verdicts.jsonl";
constexpr const char* kQuarantine = "trajectories.quarantine";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("io_error", "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& p, const std::string& content) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, p);
}

std::ofstream open_append(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::app);
  if (!out) throw Error("io_error", "cannot open " + p.string());
  return out;
}

// Splits into lines; a final line without its newline is reported as torn.
std::vector<std::string> split_lines(const std::string& text, bool& torn_tail) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      torn_tail = true;
      return lines;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  torn_tail = false;
  return lines;
}

}  // namespace

json RunManifest::to_json() const {
  return {{"schema", kSchemaVersion},
          {"run_id", run_id},
          {"stage", stage},
          {"config", config},
          {"code_version", code_version},
          {"counts", {{"tasks", counts.tasks}, {"trajectories", counts.trajectories}, {"clean", counts.clean}}},
          {"closed", closed}};
}

RunManifest RunManifest::from_json(const json& j) {
  if (j.value("schema", 0) != kSchemaVersion) throw Error("schema_mismatch", "unsupported manifest schema");
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.stage = j.at("stage").get<std::string>();
  m.config = j.at("config");
  m.code_version = j.at("code_version").get<std::string>();
  const auto& c = j.at("counts");
  m.counts = {c.at("tasks").get<long>(), c.at("trajectories").get<long>(), c.at("clean").get<long>()};
  m.closed = j.at("closed").get<bool>();
  return m;
}

Run::Run(fs::path dir, RunManifest m) : dir_(std::move(dir)), manifest_(std::move(m)) {}

void Run::write_manifest() const { write_atomic(dir_ / kManifest, manifest_.to_json().dump(2) + "\n"); }

Run Run::create(const fs::path& dir, const std::string& run_id, const std::string& stage, const json& config,
                const std::vector<env::Task>& tasks) {
  if (fs::exists(dir / kManifest)) throw Error("run_exists", "run already exists at " + dir.string());
  fs::create_directories(dir);
  RunManifest m;
  m.run_id = run_id;
  m.stage = stage;
  m.config = config;
  m.code_version = code_version();
  m.counts.tasks = static_cast<long>(tasks.size());
  std::string suite;
  for (const auto& t : tasks) suite += env::to_json(t).dump() + "\n";
  write_atomic(dir / kTasks, suite);
  write_atomic(dir / kTrajectories, "");
  write_atomic(dir / kVerdicts, "");
  Run r(dir, m);
  r.write_manifest();
  r.traj_out_ = open_append(dir / kTrajectories);
  r.verdict_out_ = open_append(dir / kVerdicts);
  return r;
}

Run Run::open(const fs::path& dir) {
  Run r(dir, read_manifest(dir));
  const fs::path log = dir / kTrajectories;
  const std::string text = read_file(log);
  bool torn = false;
  const auto lines = split_lines(text, torn);
  if (torn) {
    std::ofstream q(dir / kQuarantine, std::ios::binary | std::ios::app);
    q << lines.back() << '\n';
    fs::resize_file(log, text.size() - lines.back().size());
  }
  long max_id = -1;
  for (const auto& rec : load_trajectories(dir).records) max_id = std::max(max_id, rec.id);
  r.next_id_ = max_id + 1;
  r.traj_out_ = open_append(log);
  r.verdict_out_ = open_append(dir / kVerdicts);
  return r;
}

long Run::append_trajectory(const Trajectory& t) {
  if (manifest_.closed) throw ClosedRun(manifest_.run_id);
  const long id = next_id_++;
  json rec = {{"type", "trajectory"}, {"id", id}, {"data", to_json(t)}};
  traj_out_ << rec.dump() << '\n';
  traj_out_.flush();
  if (!traj_out_) throw Error("io_error", "append failed");
  return id;
}

void Run::append_verdict(long id, const judge::JudgeVerdict& v) {
  if (manifest_.closed) throw ClosedRun(manifest_.run_id);
  json rec = {{"type", "verdict"}, {"id", id}, {"data", to_json(v)}};
  verdict_out_ << rec.dump() << '\n';
  verdict_out_.flush();
  if (!verdict_out_) throw Error("io_error", "append failed");
}

void Run::close() {
  traj_out_.close();
  verdict_out_.close();
  const auto loaded = load_trajectories(dir_);
  const auto verdicts = load_verdicts(dir_);
  manifest_.counts.trajectories = static_cast<long>(loaded.records.size());
  long clean = 0;
  for (const auto& rec : loaded.records) {
    auto it = verdicts.find(rec.id);
    if (it != verdicts.end() && it->second.clean()) ++clean;
  }
  manifest_.counts.clean = clean;
  manifest_.closed = true;
  write_manifest();
}

RunManifest read_manifest(const fs::path& dir) {
  try {
    return RunManifest::from_json(json::parse(read_file(dir / kManifest)));
  } catch (const json::exception& e) {
    throw Error("bad_manifest", std::string("cannot parse manifest: ") + e.what());
  }
}

std::vector<env::Task> read_tasks(const fs::path& dir) {
  std::vector<env::Task> out;
  bool torn = false;
  for (const auto& line : split_lines(read_file(dir / kTasks), torn)) {
    if (!line.empty()) out.push_back(env::task_from_json(json::parse(line)));
  }
  return out;
}

LoadResult load_trajectories(const fs::path& dir) {
  LoadResult r;
  bool torn = false;
  for (const auto& line : split_lines(read_file(dir / kTrajectories), torn)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.at("type") != "trajectory") throw Error("bad_record", "unexpected record type");
      r.records.push_back({j.at("id").get<long>(), trajectory_from_json(j.at("data"))});
    } catch (const std::exception&) {
      ++r.quarantined;
    }
  }
  return r;
}

std::map<long, judge::JudgeVerdict> load_verdicts(const fs::path& dir) {
  std::map<long, judge::JudgeVerdict> out;
  if (!fs::exists(dir / kVerdicts)) return out;
  bool torn = false;
  for (const auto& line : split_lines(read_file(dir / kVerdicts), torn)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      out[j.at("id").get<long>()] = verdict_from_json(j.at("data"));
    } catch (const std::exception&) {
      // torn verdict line: the record stays unjudged
    }
  }
  return out;
}

std::vector<LabeledTrajectory> filter_clean(const std::vector<Record>& records,
                                            const std::map<long, judge::JudgeVerdict>& verdicts) {
  std::vector<long> missing;
  for (const auto& r : records) {
    if (!verdicts.count(r.id)) missing.push_back(r.id);
  }
  if (!missing.empty()) {
    std::string msg = "no verdict for record(s)";
    for (long id : missing) msg += " " + std::to_string(id);
    throw MissingVerdicts(msg, missing);
  }
  std::vector<LabeledTrajectory> out;
  for (const auto& r : records) {
    const auto labels = judge::label_positive_actions(r.trajectory, verdicts.at(r.id));
    if (labels) out.push_back({r.id, r.trajectory, *labels});
  }
  return out;
}

std::vector<LabeledTrajectory> filter_clean(const fs::path& dir) {
  return filter_clean(load_trajectories(dir).records, load_verdicts(dir));
}

VerifyReport verify(const fs::path& dir, const env::Catalog& catalog) {
  VerifyReport rep;
  auto problem = [&](std::string s) {
    rep.ok = false;
    rep.problems.push_back(std::move(s));
  };
  const RunManifest m = read_manifest(dir);
  const auto tasks = read_tasks(dir);
  std::map<std::string, const env::Task*> by_id;
  for (const auto& t : tasks) by_id[t.id] = &t;
  const auto loaded = load_trajectories(dir);
  const auto verdicts = load_verdicts(dir);
  rep.quarantined = loaded.quarantined;
  if (loaded.quarantined > 0) problem(std::to_string(loaded.quarantined) + " unreadable record(s)");

  long prev_id = -1;
  for (const auto& rec : loaded.records) {
    const std::string where = "record " + std::to_string(rec.id);
    if (rec.id <= prev_id) problem(where + ": id not increasing");
    prev_id = rec.id;
    const auto& t = rec.trajectory;
    auto it = by_id.find(t.task_id);
    if (it == by_id.end()) {
      problem(where + ": unknown task " + t.task_id);
      continue;
    }
    const env::Task& task = *it->second;
    if (static_cast<int>(t.steps.size()) > task.max_steps) problem(where + ": more steps than the budget");
    const auto& model = catalog.model(task.software);
    env::WorldState s = model.initial_state();
    std::vector<env::WorldState> visited = {s};
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      if (env::digest(env::render(model, s, t.resolution)) != t.steps[i].observation_digest) {
        problem(where + ": observation digest mismatch at step " + std::to_string(i + 1));
        break;
      }
      s = model.step(s, t.steps[i].action);
      visited.push_back(s);
    }
    if (env::digest(s) != t.final_state_digest) problem(where + ": final state digest mismatch");
    if (env::goal_check(model, s, task.goal, visited) != t.oracle_success) problem(where + ": oracle outcome mismatch");
    auto v = verdicts.find(rec.id);
    if (v != verdicts.end() && v->second.clean()) ++rep.counts.clean;
  }
  rep.counts.tasks = static_cast<long>(tasks.size());
  rep.counts.trajectories = static_cast<long>(loaded.records.size());
  if (m.closed && !(rep.counts == m.counts)) problem("manifest counts disagree with stored records");
  return rep;
}

}  // namespace coda::store

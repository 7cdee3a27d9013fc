#include "coda/pipeline/config.hpp"

#include <fstream>
#include <set>

#include "coda/env/task.hpp"

namespace coda::pipeline {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) throw Error("invalid_config", "section " + section + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw Error("invalid_config", "unknown key " + section + "." + k);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json res_json(env::Resolution r) { return json::array({r.width, r.height}); }
env::Resolution res_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

}  // namespace

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  c.judge.profiles = {{"judge-a", {1280, 800}, 0.2, 0.1, 11}, {"judge-b", {1280, 800}, 0.2, 0.1, 23}};
  judge::Strategy vote;
  vote.name = "voting@4 mixed-resolution ensemble";
  vote.schedule.k = 4;
  vote.schedule.resolutions = {{640, 400}, {1280, 800}, {1280, 800}, {1280, 800}};
  vote.schedule.ensemble = {"judge-a", "judge-b"};
  c.judge.strategies = {vote};
  return c;
}

const judge::Strategy& PipelineConfig::filter_strategy() const {
  if (judge.strategies.empty()) throw Error("invalid_config", "judge needs at least one strategy");
  return judge.strategies.front();
}

std::vector<std::string> PipelineConfig::templates() const {
  return tasks.templates.empty() ? env::builtin_templates() : tasks.templates;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c = defaults();
  check_keys(j, {"seed", "catalog", "output_dir", "planner", "executor", "tasks", "judge", "stage1", "stage2", "eval",
                 "workers"},
             "");
  read(j, "seed", c.seed);
  read(j, "catalog", c.catalog);
  read(j, "output_dir", c.output_dir);
  read(j, "workers", c.workers);
  if (j.contains("planner")) {
    const auto& p = j["planner"];
    check_keys(p, {"resolution", "temperature"}, "planner");
    if (p.contains("resolution")) c.planner_resolution = res_from(p["resolution"]);
    read(p, "temperature", c.temperature);
  }
  if (j.contains("executor")) {
    const auto& e = j["executor"];
    check_keys(e, {"sigma", "p_miss"}, "executor");
    read(e, "sigma", c.executor.sigma);
    read(e, "p_miss", c.executor.p_miss);
  }
  if (j.contains("tasks")) {
    const auto& t = j["tasks"];
    check_keys(t, {"templates", "train_per_software", "eval_per_software", "collect_per_software", "max_steps"},
               "tasks");
    read(t, "templates", c.tasks.templates);
    read(t, "train_per_software", c.tasks.train_per_software);
    read(t, "eval_per_software", c.tasks.eval_per_software);
    read(t, "collect_per_software", c.tasks.collect_per_software);
    read(t, "max_steps", c.tasks.max_steps);
  }
  if (j.contains("judge")) c.judge = judge::JudgeEvalConfig::from_json(j["judge"]);
  if (j.contains("stage1")) {
    const auto& s = j["stage1"];
    check_keys(s, {"iterations", "tasks_per_iteration", "samples_per_task", "updates_per_iteration", "group_size", "clip_epsilon", "kl_beta",
                   "learning_rate", "std_epsilon"},
               "stage1");
    read(s, "iterations", c.stage1.iterations);
    read(s, "tasks_per_iteration", c.stage1.tasks_per_iteration);
    read(s, "samples_per_task", c.stage1.samples_per_task);
    read(s, "updates_per_iteration", c.stage1.updates_per_iteration);
    read(s, "group_size", c.stage1.grpo.group_size);
    read(s, "clip_epsilon", c.stage1.grpo.clip_epsilon);
    read(s, "kl_beta", c.stage1.grpo.kl_beta);
    read(s, "learning_rate", c.stage1.grpo.learning_rate);
    read(s, "std_epsilon", c.stage1.grpo.std_epsilon);
  }
  if (j.contains("stage2")) {
    const auto& s = j["stage2"];
    check_keys(s, {"samples_per_task", "epochs", "learning_rate"}, "stage2");
    read(s, "samples_per_task", c.stage2.samples_per_task);
    read(s, "epochs", c.stage2.epochs);
    read(s, "learning_rate", c.stage2.learning_rate);
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    check_keys(e, {"k"}, "eval");
    read(e, "k", c.eval_k);
  }
  c.stage1.grpo.validate();
  if (c.stage1.iterations < 0 || c.stage1.tasks_per_iteration < 1 || c.stage1.samples_per_task < 1 ||
      c.stage1.updates_per_iteration < 1) {
    throw Error("invalid_config", "stage1 counts out of range");
  }
  if (c.stage2.epochs < 0 || !(c.stage2.learning_rate >= 0.0)) throw Error("invalid_config", "stage2 out of range");
  if (c.eval_k < 1) throw Error("invalid_config", "eval.k must be at least 1");
  if (c.workers < 1) throw Error("invalid_config", "workers must be at least 1");
  if (!(c.temperature > 0.0)) throw Error("invalid_config", "temperature must be positive");
  c.filter_strategy();
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot read config " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error("invalid_config", std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

json PipelineConfig::to_json() const {
  return {{"seed", seed},
          {"catalog", catalog},
          {"output_dir", output_dir},
          {"workers", workers},
          {"planner", {{"resolution", res_json(planner_resolution)}, {"temperature", temperature}}},
          {"executor", {{"sigma", executor.sigma}, {"p_miss", executor.p_miss}}},
          {"tasks",
           {{"templates", tasks.templates},
            {"train_per_software", tasks.train_per_software},
            {"eval_per_software", tasks.eval_per_software},
            {"collect_per_software", tasks.collect_per_software},
            {"max_steps", tasks.max_steps}}},
          {"judge", judge.to_json()},
          {"stage1",
           {{"iterations", stage1.iterations},
            {"tasks_per_iteration", stage1.tasks_per_iteration},
            {"samples_per_task", stage1.samples_per_task},
            {"updates_per_iteration", stage1.updates_per_iteration},
            {"group_size", stage1.grpo.group_size},
            {"clip_epsilon", stage1.grpo.clip_epsilon},
            {"kl_beta", stage1.grpo.kl_beta},
            {"learning_rate", stage1.grpo.learning_rate},
            {"std_epsilon", stage1.grpo.std_epsilon}}},
          {"stage2",
           {{"samples_per_task", stage2.samples_per_task},
            {"epochs", stage2.epochs},
            {"learning_rate", stage2.learning_rate}}},
          {"eval", {{"k", eval_k}}}};
}

}  // namespace coda::pipeline

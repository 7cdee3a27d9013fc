#include "coda/pipeline/stages.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "coda/agent/checkpoint.hpp"
#include "coda/common/rng.hpp"
#include "coda/judge/judge.hpp"
#include "coda/pipeline/episode.hpp"
#include "coda/rlcore/grpo.hpp"

namespace coda::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(const char* pattern, const std::string& s, int n) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, s.c_str(), n);
  return buf;
}

std::vector<env::Task> suite(const env::Catalog& catalog, const std::string& software, const PipelineConfig& c,
                             const char* stream, int n) {
  return env::generate_tasks(catalog, software, c.templates(), n,
                             derive_seed(c.seed, {hash_string(stream), hash_string(software)}), c.tasks.max_steps);
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

orchestrator::WorkUnit make_unit(std::string id, const env::Task& task, const PolicyRef& policy, int samples,
                                 std::uint64_t seed, const PipelineConfig& c) {
  orchestrator::WorkUnit u;
  u.unit_id = std::move(id);
  u.task = task;
  u.policy = policy.kind;
  u.checkpoint = policy.checkpoint;
  u.spec.samples = samples;
  u.spec.seed = seed;
  u.spec.resolution = c.planner_resolution;
  u.spec.noise = c.executor;
  u.spec.temperature = c.temperature;
  return u;
}

struct Judged {
  std::vector<store::Trajectory> trajectories;
  std::vector<judge::JudgeVerdict> verdicts;
};

Judged judge_all(const judge::Judge& j, std::vector<store::Trajectory> trajs, const PipelineConfig& c,
                 std::uint64_t trial) {
  Judged out;
  const auto& strategy = c.filter_strategy();
  for (const auto& t : trajs) {
    out.verdicts.push_back(j.run_schedule(t, strategy.schedule, c.judge.profiles, trial));
  }
  out.trajectories = std::move(trajs);
  return out;
}

// Stores a judged batch as its own run; returns the clean subset.
std::vector<store::LabeledTrajectory> persist_and_filter(const Judged& batch, const std::vector<env::Task>& tasks,
                                                         const fs::path& dir, const std::string& run_id,
                                                         const std::string& stage, const PipelineConfig& c) {
  std::vector<store::Record> records;
  std::map<long, judge::JudgeVerdict> verdicts;
  std::optional<store::Run> run;
  if (!dir.empty()) run.emplace(store::Run::create(dir, run_id, stage, c.to_json(), tasks));
  for (std::size_t i = 0; i < batch.trajectories.size(); ++i) {
    const long id = run ? run->append_trajectory(batch.trajectories[i]) : static_cast<long>(i);
    if (run) run->append_verdict(id, batch.verdicts[i]);
    records.push_back({id, batch.trajectories[i]});
    verdicts[id] = batch.verdicts[i];
  }
  if (run) run->close();
  return store::filter_clean(records, verdicts);
}

fs::path out_path(const PipelineConfig& c, const std::string& sub) {
  return c.output_dir.empty() ? fs::path() : fs::path(c.output_dir) / sub;
}

}  // namespace

std::vector<env::Task> train_tasks(const env::Catalog& catalog, const std::string& software, const PipelineConfig& c) {
  return suite(catalog, software, c, "train", c.tasks.train_per_software);
}

std::vector<env::Task> eval_tasks(const env::Catalog& catalog, const std::string& software, const PipelineConfig& c) {
  return suite(catalog, software, c, "eval", c.tasks.eval_per_software);
}

std::vector<env::Task> collect_tasks(const env::Catalog& catalog, const std::string& software,
                                     const PipelineConfig& c) {
  return suite(catalog, software, c, "collect", c.tasks.collect_per_software);
}

PolicyRef PolicyRef::planner(const agent::PlannerParams& params) {
  return {"planner", agent::checkpoint_to_string(params)};
}

PolicyRef PolicyRef::oracle() { return {"oracle", ""}; }

json EvalReport::to_json() const {
  json rows = json::array();
  for (const auto& s : per_software) {
    rows.push_back({{"software", s.software}, {"tasks", s.tasks}, {"average", s.average}, {"pass", s.pass}});
  }
  return {{"k", k},
          {"per_software", rows},
          {"overall", {{"average", overall_average}, {"pass", overall_pass}}},
          {"overall_task_weighted", {{"average", task_weighted_average}, {"pass", task_weighted_pass}}}};
}

std::string EvalReport::to_text(const std::string& title) const {
  std::ostringstream out;
  char buf[160];
  out << title << '\n';
  const std::string avg = "Average@" + std::to_string(k);
  const std::string pass = "Pass@" + std::to_string(k);
  std::snprintf(buf, sizeof buf, "%-10s %10s %8s\n", "Software", avg.c_str(), pass.c_str());
  out << buf;
  for (const auto& s : per_software) {
    std::snprintf(buf, sizeof buf, "%-10s %10.2f %8.2f\n", s.software.c_str(), 100 * s.average, 100 * s.pass);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-10s %10.2f %8.2f\n", "Overall", 100 * overall_average, 100 * overall_pass);
  out << buf;
  return out.str();
}

EvalReport evaluate(const env::Catalog& catalog, const PolicyRef& policy, const std::vector<env::Task>& tasks, int k,
                    const PipelineConfig& config, orchestrator::RolloutBackend& backend, std::uint64_t seed) {
  if (k < 1) throw Error("invalid_argument", "k must be at least 1");
  std::vector<orchestrator::WorkUnit> units;
  std::map<std::string, const env::Task*> by_unit;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string id = fmt("ev-%s-%05d", tasks[i].software, static_cast<int>(i));
    units.push_back(make_unit(id, tasks[i], policy, k, derive_seed(seed, {hash_string(tasks[i].id), i}), config));
    by_unit[id] = &tasks[i];
  }
  const auto trajs = backend.run(units);

  std::map<std::string, int> successes;  // per unit
  for (const auto& t : trajs) successes[t.unit_id] += t.oracle_success;

  EvalReport r;
  r.k = k;
  std::map<std::string, SoftwareScore> per;
  for (const auto& u : units) {
    auto& s = per[u.task.software];
    s.software = u.task.software;
    s.tasks += 1;
    const int wins = successes[u.unit_id];
    s.average += static_cast<double>(wins) / k;
    s.pass += wins > 0 ? 1.0 : 0.0;
  }
  int total_tasks = 0;
  for (const auto& name : catalog.names()) {
    auto it = per.find(name);
    if (it == per.end()) continue;
    auto s = it->second;
    r.task_weighted_average += s.average;
    r.task_weighted_pass += s.pass;
    total_tasks += s.tasks;
    s.average /= s.tasks;
    s.pass /= s.tasks;
    r.per_software.push_back(s);
  }
  if (!r.per_software.empty()) {
    for (const auto& s : r.per_software) {
      r.overall_average += s.average;
      r.overall_pass += s.pass;
    }
    r.overall_average /= r.per_software.size();
    r.overall_pass /= r.per_software.size();
    r.task_weighted_average /= total_tasks;
    r.task_weighted_pass /= total_tasks;
  }
  return r;
}

json IterationMetrics::to_json() const {
  return {{"iteration", iteration},     {"trajectories", trajectories}, {"oracle_successes", oracle_successes},
          {"clean", clean},             {"labeled_steps", labeled_steps}, {"mean_reward", mean_reward},
          {"loss", loss},               {"kl", kl},                     {"clip_fraction", clip_fraction},
          {"advantage_std", advantage_std}, {"skipped", skipped}};
}

Stage1Result stage1_train(const env::Catalog& catalog, const std::string& software, const PipelineConfig& config,
                          orchestrator::RolloutBackend& backend) {
  const auto& model = catalog.model(software);
  const auto tasks = train_tasks(catalog, software, config);
  const judge::Judge judge(catalog, tasks);
  const auto& grpo = config.stage1.grpo;
  const fs::path dir = out_path(config, "stage1-" + software);
  std::optional<rlcore::MetricsLog> log;
  if (!dir.empty()) {
    fs::create_directories(dir);
    log.emplace(dir / "metrics.jsonl");
  }

  Stage1Result res;
  res.params = agent::base_params();
  res.params.version = "stage1-" + software + "-init";
  std::map<std::string, const env::Task*> task_by_id;
  for (const auto& t : tasks) task_by_id[t.id] = &t;

  for (int it = 0; it < config.stage1.iterations; ++it) {
    IterationMetrics m;
    m.iteration = it;
    std::vector<orchestrator::WorkUnit> units;
    const PolicyRef policy = PolicyRef::planner(res.params);
    for (int b = 0; b < config.stage1.tasks_per_iteration; ++b) {
      const int idx = (it * config.stage1.tasks_per_iteration + b) % static_cast<int>(tasks.size());
      char id[96];
      std::snprintf(id, sizeof id, "s1-%s-it%03d-%04d", software.c_str(), it, b);
      units.push_back(make_unit(id, tasks[idx], policy, config.stage1.samples_per_task,
                                derive_seed(config.seed, {hash_string("rollout"), hash_string(software),
                                                          static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(b)}),
                                config));
    }
    const Judged batch = judge_all(judge, backend.run(units), config, static_cast<std::uint64_t>(it));
    m.trajectories = static_cast<int>(batch.trajectories.size());
    for (const auto& t : batch.trajectories) m.oracle_successes += t.oracle_success;
    char run_dir[32];
    std::snprintf(run_dir, sizeof run_dir, "it%03d", it);
    const auto clean = persist_and_filter(batch, tasks, dir.empty() ? dir : dir / run_dir,
                                          "stage1-" + software + "-" + run_dir, "stage1:" + software, config);
    m.clean = static_cast<int>(clean.size());

    if (clean.empty()) {
      m.skipped = true;
      warn("stage1 " + software + " iteration " + std::to_string(it) + ": no clean trajectories, update skipped");
    } else {
      // Groups are sampled once from the iteration's starting policy, which
      // is also pi_ref; the update passes then move theta away from it.
      const agent::PlannerParams ref = res.params;
      struct Group {
        std::unique_ptr<ReplayedStep> step;
        std::vector<Plan> plans;
        std::vector<double> advantages;
      };
      std::vector<Group> groups;
      double reward_sum = 0.0, adv_std_sum = 0.0;
      for (std::size_t r = 0; r < clean.size(); ++r) {
        const auto& lt = clean[r];
        const env::Task& task = *task_by_id.at(lt.trajectory.task_id);
        for (std::size_t t = 0; t < lt.positives.size(); ++t) {
          Group g;
          g.step = replay_to(catalog, task, lt.trajectory, static_cast<int>(t));
          const std::uint64_t gseed = derive_seed(config.seed, {hash_string("group"), hash_string(software),
                                                                static_cast<std::uint64_t>(it), r, t});
          const auto sampled = agent::sample_group(ref, *g.step->context, grpo.group_size, gseed, config.temperature);
          std::vector<double> rewards;
          for (std::size_t i = 0; i < sampled.size(); ++i) {
            const auto a = agent::ground(sampled[i].plan, g.step->current, config.executor, derive_seed(gseed, {i + 1}));
            g.plans.push_back(sampled[i].plan);
            rewards.push_back(rlcore::action_reward(a.action, lt.positives[t], model.native()));
          }
          g.advantages = rlcore::group_advantages(rewards, grpo.std_epsilon);
          double mean_r = 0.0, adv_var = 0.0;
          for (double x : rewards) mean_r += x;
          for (double a : g.advantages) adv_var += a * a;
          reward_sum += mean_r / rewards.size();
          adv_std_sum += std::sqrt(adv_var / g.advantages.size());
          groups.push_back(std::move(g));
        }
      }
      m.labeled_steps = static_cast<int>(groups.size());
      const double n = m.labeled_steps;
      m.mean_reward = reward_sum / n;
      m.advantage_std = adv_std_sum / n;

      // Degenerate groups carry no advantage; averaging over the informative
      // ones keeps the step size from shrinking as the policy improves.
      double informative = 0.0;
      for (const auto& g : groups) {
        if (std::any_of(g.advantages.begin(), g.advantages.end(), [](double a) { return a != 0.0; })) ++informative;
      }
      for (int pass = 0; pass < config.stage1.updates_per_iteration && informative > 0.0; ++pass) {
        std::vector<double> grad(agent::kFeatureDim, 0.0);
        double loss_sum = 0.0, kl_sum = 0.0, clip_sum = 0.0;
        for (const auto& g : groups) {
          const auto members =
              rlcore::make_group(res.params, ref, *g.step->context, g.plans, g.advantages, config.temperature);
          const auto loss = rlcore::grpo_loss(members, grpo);
          for (int k = 0; k < agent::kFeatureDim; ++k) grad[k] += loss.gradient[k] / informative;
          loss_sum += loss.loss;
          kl_sum += loss.mean_kl;
          clip_sum += loss.clip_fraction;
        }
        m.loss = loss_sum / n;
        m.kl = kl_sum / n;
        m.clip_fraction = clip_sum / n;
        res.params = rlcore::sgd_step(res.params, grad, grpo.learning_rate);
      }
    }
    char version[96];
    std::snprintf(version, sizeof version, "stage1-%s-it%03d", software.c_str(), it);
    res.params.version = version;
    if (log) {
      log->append({it, m.loss, m.mean_reward, m.kl, m.clip_fraction, m.advantage_std});
      agent::save_checkpoint(dir / (std::string(version) + ".ckpt"), res.params);
    }
    res.iterations.push_back(m);
  }
  if (!dir.empty()) {
    agent::save_checkpoint(dir / "final.ckpt", res.params);
    json its = json::array();
    for (const auto& m : res.iterations) its.push_back(m.to_json());
    std::ofstream(dir / "report.json") << json{{"software", software}, {"iterations", its}}.dump(2) << '\n';
  }
  return res;
}

PooledData collect_specialist_data(const env::Catalog& catalog,
                                   const std::map<std::string, agent::PlannerParams>& specialists,
                                   const PipelineConfig& config, orchestrator::RolloutBackend& backend) {
  PooledData pooled;
  for (const auto& [software, params] : specialists) {
    const auto tasks = collect_tasks(catalog, software, config);
    const judge::Judge judge(catalog, tasks);
    std::vector<orchestrator::WorkUnit> units;
    const PolicyRef policy = PolicyRef::planner(params);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      units.push_back(make_unit(fmt("col-%s-%05d", software, static_cast<int>(i)), tasks[i], policy,
                                config.stage2.samples_per_task,
                                derive_seed(config.seed, {hash_string("collect"), hash_string(software), i}), config));
    }
    const Judged batch = judge_all(judge, backend.run(units), config, 0);
    const fs::path dir = out_path(config, "stage2/collect-" + software);
    const auto clean = persist_and_filter(batch, tasks, dir, "collect-" + software, "stage2", config);
    if (clean.empty()) warn("specialist for " + software + " produced no clean trajectories");
    pooled.per_software[software] = static_cast<int>(clean.size());
    pooled.tasks.insert(pooled.tasks.end(), tasks.begin(), tasks.end());
    pooled.trajectories.insert(pooled.trajectories.end(), clean.begin(), clean.end());
  }
  return pooled;
}

SftResult stage2_sft(const env::Catalog& catalog, const PooledData& data, const PipelineConfig& config) {
  if (data.trajectories.empty()) throw Error("empty_data", "stage2 needs at least one clean trajectory");
  std::map<std::string, const env::Task*> task_by_id;
  for (const auto& t : data.tasks) task_by_id[t.id] = &t;

  std::vector<std::unique_ptr<ReplayedStep>> steps;
  std::vector<Plan> targets;
  for (const auto& lt : data.trajectories) {
    auto it = task_by_id.find(lt.trajectory.task_id);
    if (it == task_by_id.end()) throw Error("unknown_task", "pooled trajectory refers to unknown task");
    for (std::size_t t = 0; t < lt.trajectory.steps.size(); ++t) {
      steps.push_back(replay_to(catalog, *it->second, lt.trajectory, static_cast<int>(t)));
      targets.push_back(lt.trajectory.steps[t].plan);
    }
  }
  const double n = static_cast<double>(steps.size());

  SftResult res;
  res.params = agent::base_params();
  res.params.version = "stage2-generalist";
  auto pass = [&](const agent::PlannerParams& params, std::vector<double>& grad) {
    double nll = 0.0;
    grad.assign(agent::kFeatureDim, 0.0);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const agent::PlanDistribution d(params, *steps[i]->context, config.temperature);
      nll -= d.log_prob(targets[i]);
      const auto g = d.grad_log_prob(targets[i]);
      for (int k = 0; k < agent::kFeatureDim; ++k) grad[k] -= g[k] / n;
    }
    return nll / n;
  };
  // Gradient descent with step halving: a step that would raise the loss is
  // retried at half the rate, and the reduced rate is kept.
  std::vector<double> grad, next_grad;
  double loss = pass(res.params, grad);
  double lr = config.stage2.learning_rate;
  for (int e = 0; e < config.stage2.epochs; ++e) {
    res.epoch_loss.push_back(loss);
    for (int tries = 0; tries < 40; ++tries, lr *= 0.5) {
      auto candidate = rlcore::sgd_step(res.params, grad, lr);
      const double l = pass(candidate, next_grad);
      if (l <= loss) {
        res.params = std::move(candidate);
        loss = l;
        grad.swap(next_grad);
        break;
      }
    }
  }
  res.epoch_loss.push_back(loss);
  res.params.version = "stage2-generalist";

  const fs::path dir = out_path(config, "stage2");
  if (!dir.empty()) {
    fs::create_directories(dir);
    agent::save_checkpoint(dir / "generalist.ckpt", res.params);
    json counts = data.per_software;
    std::ofstream(dir / "sft.json") << json{{"examples", steps.size()}, {"pooled", counts}, {"loss", res.epoch_loss}}.dump(2)
                                    << '\n';
  }
  return res;
}

}  // namespace coda::pipeline

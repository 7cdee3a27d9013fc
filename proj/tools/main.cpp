#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <thread>

#include "coda/agent/checkpoint.hpp"
#include "coda/common/error.hpp"
#include "coda/common/rng.hpp"
#include "coda/env/catalog.hpp"
#include "coda/env/serialize.hpp"
#include "coda/env/task.hpp"
#include "coda/judge/judge.hpp"
#include "coda/orchestrator/master.hpp"
#include "coda/orchestrator/worker.hpp"
#include "coda/pipeline/stages.hpp"
#include "coda/store/run.hpp"

using namespace coda;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot read " + path);
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw Error("invalid_config", path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("io_error", "cannot write " + path.string());
  out << text;
}

// Flags override defaults; the config file overrides flags.
struct ConfigArgs {
  std::string file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<int> workers;

  void add_to(CLI::App* app, bool with_file_required) {
    auto* f = app->add_option("--config", file, "pipeline config (JSON)");
    if (with_file_required) f->required();
    f->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--out", output_dir, "output directory");
    app->add_option("--workers", workers, "rollout workers; more than one serves rollouts over HTTP")
        ->check(CLI::PositiveNumber);
  }

  pipeline::PipelineConfig resolve() const {
    json j = pipeline::PipelineConfig::defaults().to_json();
    if (seed) j["seed"] = *seed;
    if (output_dir) j["output_dir"] = *output_dir;
    if (workers) j["workers"] = *workers;
    if (!file.empty()) j.merge_patch(read_json_file(file));
    return pipeline::PipelineConfig::from_json(j);
  }
};

const env::Catalog& catalog_for(const std::string& path, std::unique_ptr<env::Catalog>& holder) {
  if (path.empty()) return env::Catalog::builtin();
  holder = std::make_unique<env::Catalog>(env::Catalog::load(path));
  return *holder;
}

std::unique_ptr<orchestrator::RolloutBackend> backend_for(const env::Catalog& cat, int workers) {
  if (workers > 1) return std::make_unique<orchestrator::HttpBackend>(cat, workers);
  return std::make_unique<orchestrator::LocalBackend>(cat);
}

pipeline::PolicyRef policy_for(const std::string& params) {
  if (params == "oracle") return pipeline::PolicyRef::oracle();
  if (params == "base") return pipeline::PolicyRef::planner(agent::base_params());
  return pipeline::PolicyRef::planner(agent::load_checkpoint(params));
}

std::string require_output_dir(const pipeline::PipelineConfig& c) {
  if (c.output_dir.empty()) throw Error("invalid_config", "output_dir (or --out) is required");
  return c.output_dir;
}

// Specialist checkpoints: explicit sw=path pairs, else each app's stage-1
// final checkpoint under the output directory.
std::map<std::string, agent::PlannerParams> specialists_for(const env::Catalog& cat,
                                                            const std::vector<std::string>& pairs,
                                                            const pipeline::PipelineConfig& c) {
  std::map<std::string, std::string> paths;
  for (const auto& p : pairs) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw Error("invalid_argument", "expected software=checkpoint, got " + p);
    paths[p.substr(0, eq)] = p.substr(eq + 1);
  }
  if (paths.empty()) {
    const std::string out = require_output_dir(c);
    for (const auto& sw : cat.names()) paths[sw] = (fs::path(out) / ("stage1-" + sw) / "final.ckpt").string();
  }
  std::map<std::string, agent::PlannerParams> out;
  for (const auto& [sw, path] : paths) {
    cat.slot(sw);
    out[sw] = agent::load_checkpoint(path);
  }
  return out;
}

int cmd_gen_tasks(const std::string& software, int n, std::uint64_t seed, const std::string& templates,
                  int max_steps, const std::string& catalog_path, const std::string& out) {
  std::unique_ptr<env::Catalog> holder;
  const auto& cat = catalog_for(catalog_path, holder);
  std::vector<std::string> tpl = cat.templates();
  if (!templates.empty()) {
    tpl.clear();
    std::stringstream ss(templates);
    for (std::string t; std::getline(ss, t, ',');) tpl.push_back(t);
  }
  const auto tasks = env::generate_tasks(cat, software, tpl, n, seed, max_steps);
  if (out.empty()) {
    json j = {{"tasks", json::array()}};
    for (const auto& t : tasks) j["tasks"].push_back(env::to_json(t));
    std::cout << j.dump(2) << '\n';
  } else {
    env::save_suite(out, tasks);
    std::cout << "wrote " << tasks.size() << " tasks to " << out << '\n';
  }
  return 0;
}

struct ServeArgs {
  std::string bind;
  std::string run;
  std::string suite;
  std::string params = "base";
  int samples = 8;
  std::uint64_t seed = 0;
  long lease_ms = 60000;
  int max_retries = 3;
  std::string catalog;
  bool stay = false;
};

int cmd_serve_master(const ServeArgs& a) {
  std::unique_ptr<env::Catalog> holder;
  const auto& cat = catalog_for(a.catalog, holder);
  const auto tasks = env::load_suite(a.suite);
  const auto policy = policy_for(a.params);
  std::vector<orchestrator::WorkUnit> units;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    cat.slot(tasks[i].software);
    orchestrator::WorkUnit u;
    char id[32];
    std::snprintf(id, sizeof id, "unit-%05zu", i);
    u.unit_id = id;
    u.task = tasks[i];
    u.policy = policy.kind;
    u.checkpoint = policy.checkpoint;
    u.spec.samples = a.samples;
    u.spec.seed = derive_seed(a.seed, {i});
    units.push_back(std::move(u));
  }
  const std::string bind = a.bind.empty() ? env_or("CODA_BIND", "127.0.0.1:8700") : a.bind;
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Error("invalid_argument", "bind address must be host:port");
  orchestrator::MasterOptions mo;
  mo.host = bind.substr(0, colon);
  mo.port = std::stoi(bind.substr(colon + 1));
  mo.queue.lease_deadline = std::chrono::milliseconds(a.lease_ms);
  mo.queue.max_retries = a.max_retries;

  auto run = store::Run::create(a.run, fs::path(a.run).filename().string(), "rollout",
                                {{"params", a.params}, {"samples", a.samples}, {"seed", a.seed}}, tasks);
  orchestrator::Master master(units, mo, &run);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  master.start();
  std::cerr << "serving " << units.size() << " units on " << master.url() << '\n';
  while (!g_interrupted && (a.stay || !master.queue().drained())) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    master.queue().expire(orchestrator::Clock::now());
  }
  // Drained workers still poll once more to learn they are done.
  if (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(500));
  master.stop();
  run.close();
  std::cout << master.queue().status(orchestrator::Clock::now()).to_json().dump() << '\n';
  return master.queue().poisoned().empty() ? 0 : 1;
}

int cmd_worker(const std::string& url, const std::string& catalog_path, const std::string& name, int attempts) {
  std::unique_ptr<env::Catalog> holder;
  const auto& cat = catalog_for(catalog_path, holder);
  orchestrator::WorkerOptions wo;
  wo.master_url = url.empty() ? env_or("CODA_MASTER_URL", "http://127.0.0.1:8700") : url;
  wo.name = name;
  wo.connect_attempts = attempts;
  wo.stop = &g_interrupted;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto st = orchestrator::run_worker(cat, wo);
  std::cout << json{{"worker_id", st.worker_id},
                    {"leased", st.leased},
                    {"accepted", st.accepted},
                    {"duplicate_acks", st.duplicate_acks},
                    {"failed_units", st.failed_units}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_train_stage1(const std::string& software, const ConfigArgs& ca) {
  const auto c = ca.resolve();
  std::unique_ptr<env::Catalog> holder;
  const auto& cat = catalog_for(c.catalog, holder);
  auto backend = backend_for(cat, c.workers);
  const auto r = pipeline::stage1_train(cat, software, c, *backend);
  for (const auto& m : r.iterations) std::cout << m.to_json().dump() << '\n';
  if (c.output_dir.empty()) std::cout << agent::checkpoint_to_string(r.params);
  return 0;
}

int cmd_collect(const std::vector<std::string>& specialists, const ConfigArgs& ca) {
  const auto c = ca.resolve();
  require_output_dir(c);
  std::unique_ptr<env::Catalog> holder;
  const auto& cat = catalog_for(c.catalog, holder);
  auto backend = backend_for(cat, c.workers);
  const auto pooled = pipeline::collect_specialist_data(cat, specialists_for(cat, specialists, c), c, *backend);
  std::cout << json{{"clean", pooled.per_software}, {"total", pooled.trajectories.size()}}.dump() << '\n';
  return 0;
}

int cmd_train_stage2(const ConfigArgs& ca) {
  const auto c = ca.resolve();
  const fs::path root = fs::path(require_output_dir(c)) / "stage2";
  std::unique_ptr<env::Catalog> holder;
  const auto& cat = catalog_for(c.catalog, holder);
  pipeline::PooledData data;
  for (const auto& sw : cat.names()) {
    const fs::path dir = root / ("collect-" + sw);
    if (!fs::exists(dir)) throw Error("missing_data", "no collected run at " + dir.string());
    const auto tasks = store::read_tasks(dir);
    const auto clean = store::filter_clean(dir);
    data.tasks.insert(data.tasks.end(), tasks.begin(), tasks.end());
    data.trajectories.insert(data.trajectories.end(), clean.begin(), clean.end());
    data.per_software[sw] = static_cast<int>(clean.size());
  }
  const auto r = pipeline::stage2_sft(cat, data, c);
  std::cout << json{{"examples", data.trajectories.size()}, {"final_loss", r.epoch_loss.back()}}.dump() << '\n';
  return 0;
}

int cmd_eval(const std::string& params, const std::string& suite_path, int k, const std::string& json_out,
             const ConfigArgs& ca) {
  const auto c = ca.resolve();
  std::unique_ptr<env::Catalog> holder;
  const auto& cat = catalog_for(c.catalog, holder);
  auto backend = backend_for(cat, c.workers);
  const auto suite = env::load_suite(suite_path);
  const auto r = pipeline::evaluate(cat, policy_for(params), suite, k, c, *backend, c.seed);
  std::cout << r.to_text("eval " + params);
  if (!json_out.empty()) write_text(json_out, r.to_json().dump(2) + "\n");
  return 0;
}

int cmd_judge_eval(const std::string& run, const std::string& schedule, const std::string& catalog_path,
                   std::optional<std::uint64_t> seed, const std::string& json_out) {
  std::unique_ptr<env::Catalog> holder;
  const auto& cat = catalog_for(catalog_path, holder);
  auto cfg = judge::JudgeEvalConfig::from_json(read_json_file(schedule));
  if (seed) {
    for (auto& p : cfg.profiles) p.seed = derive_seed(*seed, {hash_string(p.id)});
  }
  const judge::Judge j(cat, store::read_tasks(run));
  std::vector<store::Trajectory> corpus;
  for (auto& r : store::load_trajectories(run).records) corpus.push_back(std::move(r.trajectory));
  const auto rows = judge::evaluate_strategies(j, corpus, cfg);
  std::cout << judge::report_text(rows);
  if (!json_out.empty()) write_text(json_out, judge::report_json(rows).dump(2) + "\n");
  return 0;
}

int cmd_store_verify(const std::string& run, const std::string& catalog_path) {
  std::unique_ptr<env::Catalog> holder;
  const auto& cat = catalog_for(catalog_path, holder);
  const auto rep = store::verify(run, cat);
  for (const auto& p : rep.problems) std::cout << "problem: " << p << '\n';
  std::cout << json{{"ok", rep.ok},
                    {"trajectories", rep.counts.trajectories},
                    {"clean", rep.counts.clean},
                    {"quarantined", rep.quarantined}}
                   .dump()
            << '\n';
  if (!rep.ok) throw Error("verify_failed", std::to_string(rep.problems.size()) + " problems in " + run);
  return 0;
}

void error_line(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coda: planner-executor training at desk scale"};
  app.require_subcommand(1);
  int status = 0;

  std::string software, templates, catalog, out;
  int n = 10, max_steps = 15;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen-tasks", "generate a task suite");
  gen->add_option("software", software, "application name")->required();
  gen->add_option("-n", n, "number of tasks")->required()->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--templates", templates, "comma-separated template names");
  gen->add_option("--max-steps", max_steps, "step budget per task")->check(CLI::PositiveNumber);
  gen->add_option("--catalog", catalog, "catalog file");
  gen->add_option("--out", out, "suite file to write (default stdout)");
  gen->callback([&] { status = cmd_gen_tasks(software, n, seed, templates, max_steps, catalog, out); });

  ServeArgs sa;
  auto* serve = app.add_subcommand("serve-master", "serve a suite's rollouts to workers over HTTP");
  serve->add_option("--bind", sa.bind, "host:port (default $CODA_BIND or 127.0.0.1:8700)");
  serve->add_option("--run", sa.run, "run directory to create")->required();
  serve->add_option("--suite", sa.suite, "task suite file")->required()->check(CLI::ExistingFile);
  serve->add_option("--params", sa.params, "checkpoint file, 'base' or 'oracle'");
  serve->add_option("--samples", sa.samples, "rollouts per task")->check(CLI::PositiveNumber);
  serve->add_option("--seed", sa.seed, "seed for per-unit rollout seeds");
  serve->add_option("--lease-ms", sa.lease_ms, "lease deadline")->check(CLI::PositiveNumber);
  serve->add_option("--max-retries", sa.max_retries, "retries before a unit is poisoned")
      ->check(CLI::NonNegativeNumber);
  serve->add_option("--catalog", sa.catalog, "catalog file");
  serve->add_flag("--stay", sa.stay, "keep serving after the queue drains");
  serve->callback([&] { status = cmd_serve_master(sa); });

  std::string url, name = "worker";
  int attempts = 8;
  std::uint64_t worker_seed = 0;
  auto* worker = app.add_subcommand("worker", "execute work units until the master drains");
  worker->add_option("--master", url, "master URL (default $CODA_MASTER_URL)");
  worker->add_option("--name", name, "worker name");
  worker->add_option("--attempts", attempts, "consecutive failed requests before exiting")
      ->check(CLI::PositiveNumber);
  worker->add_option("--catalog", catalog, "catalog file");
  worker->add_option("--seed", worker_seed, "unused; rollout seeds come from the master");
  worker->callback([&] { status = cmd_worker(url, catalog, name, attempts); });

  ConfigArgs s1;
  auto* stage1 = app.add_subcommand("train-stage1", "train one application's specialist");
  stage1->add_option("software", software, "application name")->required();
  s1.add_to(stage1, true);
  stage1->callback([&] { status = cmd_train_stage1(software, s1); });

  ConfigArgs col;
  std::vector<std::string> specialists;
  auto* collect = app.add_subcommand("collect-specialist", "roll out specialists and keep judge-clean data");
  col.add_to(collect, true);
  collect->add_option("--specialist", specialists, "software=checkpoint (default: stage-1 outputs)");
  collect->callback([&] { status = cmd_collect(specialists, col); });

  ConfigArgs s2;
  auto* stage2 = app.add_subcommand("train-stage2", "fine-tune the generalist on collected data");
  s2.add_to(stage2, true);
  stage2->callback([&] { status = cmd_train_stage2(s2); });

  ConfigArgs ev;
  std::string params, suite, json_out;
  int k = 8;
  auto* eval = app.add_subcommand("eval", "Average@k and Pass@k of a policy on a suite");
  eval->add_option("--params", params, "checkpoint file, 'base' or 'oracle'")->required();
  eval->add_option("--suite", suite, "task suite file")->required()->check(CLI::ExistingFile);
  eval->add_option("-k", k, "attempts per task")->check(CLI::PositiveNumber);
  eval->add_option("--json", json_out, "also write the report as JSON");
  ev.add_to(eval, false);
  eval->callback([&] { status = cmd_eval(params, suite, k, json_out, ev); });

  std::string run, schedule;
  std::optional<std::uint64_t> judge_seed;
  auto* jeval = app.add_subcommand("judge-eval", "precision/recall of judge strategies on a run");
  jeval->add_option("--run", run, "run directory")->required()->check(CLI::ExistingDirectory);
  jeval->add_option("--schedule", schedule, "judge profiles and strategies (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  jeval->add_option("--seed", judge_seed, "reseed every judge profile");
  jeval->add_option("--catalog", catalog, "catalog file");
  jeval->add_option("--json", json_out, "also write the report as JSON");
  jeval->callback([&] { status = cmd_judge_eval(run, schedule, catalog, judge_seed, json_out); });

  auto* store_cmd = app.add_subcommand("store", "inspect run directories");
  store_cmd->require_subcommand(1);
  std::uint64_t store_seed = 0;
  auto* verify = store_cmd->add_subcommand("verify", "replay and check a run");
  verify->add_option("run", run, "run directory")->required()->check(CLI::ExistingDirectory);
  verify->add_option("--catalog", catalog, "catalog file");
  verify->add_option("--seed", store_seed, "unused; verification is deterministic");
  verify->callback([&] { status = cmd_store_verify(run, catalog); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_line("usage", e.what());
    return 2;
  } catch (const Error& e) {
    error_line(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line("internal", e.what());
    return 1;
  }
  return status;
}

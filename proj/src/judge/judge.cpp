#include "coda/judge/judge.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "coda/common/rng.hpp"
#include "coda/env/goal.hpp"
#include "coda/env/solver.hpp"

namespace coda::judge {

using nlohmann::json;

void JudgeProfile::validate() const {
  if (id.empty()) throw Error("invalid_profile", "judge profile needs an id");
  if (!(fp >= 0.0 && fp < 1.0) || !(fn >= 0.0 && fn < 1.0)) {
    throw Error("invalid_profile", "judge error rates must lie in [0, 1)");
  }
}

void VoteSchedule::validate() const {
  if (k < 1) throw Error("invalid_schedule", "vote count must be at least 1");
  if (!resolutions.empty() && static_cast<int>(resolutions.size()) != k) {
    throw Error("invalid_schedule", "one resolution per round required");
  }
  if (ensemble.empty()) throw Error("invalid_schedule", "schedule needs at least one profile");
}

namespace {

// What a judge knows about the GUI after reading frames 0..j: the current
// screen, and for each widget its value in the latest frame that showed it
// (unknown if blanked there or never shown).
class FrameValuation final : public env::Valuation {
 public:
  const std::string& screen() const override { return screen_; }
  const std::string* value(const std::string& widget) const override {
    auto it = values_.find(widget);
    if (it == values_.end() || !it->second) return nullptr;
    return &*it->second;
  }

  void observe(const env::Observation& o) {
    screen_ = o.screen;
    for (const auto& w : o.widgets) values_[w.id] = w.value;
  }

  const std::map<std::string, std::optional<std::string>>& values() const { return values_; }

 private:
  std::string screen_;
  std::map<std::string, std::optional<std::string>> values_;
};

std::string resolution_key(env::Resolution r) { return std::to_string(r.width) + "x" + std::to_string(r.height); }

}  // namespace

Judge::Judge(const env::Catalog& catalog, std::vector<env::Task> tasks) : catalog_(&catalog) {
  for (auto& t : tasks) {
    const std::string id = t.id;
    tasks_.emplace(id, std::move(t));
  }
}

const env::Task& Judge::task(const std::string& id) const {
  auto it = tasks_.find(id);
  if (it == tasks_.end()) throw Error("unknown_task", "no task " + id);
  return it->second;
}

bool Judge::oracle_success(const store::Trajectory& traj) const {
  const auto& t = task(traj.task_id);
  const auto& model = catalog_->model(t.software);
  std::vector<env::WorldState> states = {model.initial_state()};
  for (const auto& s : traj.steps) states.push_back(model.step(states.back(), s.action));
  return env::goal_check(model, states.back(), t.goal, states);
}

JudgeVerdict Judge::compute(const store::Trajectory& traj, env::Resolution res) const {
  if (traj.steps.empty()) throw Error("empty_trajectory", "cannot judge an empty trajectory");
  const auto& t = task(traj.task_id);
  const auto& model = catalog_->model(t.software);
  const env::WorldState initial = model.initial_state();

  std::vector<env::WorldState> states = {initial};
  for (const auto& s : traj.steps) states.push_back(model.step(states.back(), s.action));
  std::vector<env::Observation> frames;
  frames.reserve(states.size());
  for (const auto& s : states) frames.push_back(env::render(model, s, res));

  std::vector<FrameValuation> known(frames.size());
  FrameValuation acc;
  for (std::size_t j = 0; j < frames.size(); ++j) {
    acc.observe(frames[j]);
    known[j] = acc;
  }

  JudgeVerdict v;
  std::vector<const env::Valuation*> timeline;
  for (const auto& k : known) timeline.push_back(&k);
  v.correctness = env::evaluate(t.goal, timeline);

  const int n = static_cast<int>(traj.steps.size());
  for (int j = 1; j <= n; ++j) {
    if (traj.steps[j - 1].action.kind != ActionKind::kFinish && frames[j] == frames[j - 1]) v.redundant.push_back(j);
  }
  if (v.correctness) return v;

  for (int j = 1; j <= n; ++j) {
    const bool finished = traj.steps[j - 1].action.kind == ActionKind::kFinish;
    const int budget = finished ? 0 : traj.max_steps - 1 - j;
    bool reachable = false;
    if (budget >= 0) {
      env::WorldState belief = states[j];
      for (std::size_t w = 0; w < belief.values.size(); ++w) {
        const auto* seen = known[j].value(model.widgets()[w].id);
        belief.values[w] = seen ? *seen : initial.values[w];
      }
      std::vector<int> progress;
      for (const auto& atom : t.goal.atoms) {
        if (atom.kind != env::GoalAtom::Kind::kOrderedSubgoals) continue;
        int matched = 0;
        for (int f = 0; f <= j; ++f) matched = env::advance_ordered(atom, matched, known[f]);
        progress.push_back(matched);
      }
      env::SolverLimits limits;
      limits.max_depth = budget;
      reachable = env::solve(model, t.goal, belief, progress, limits).has_value();
    }
    if (!reachable) {
      v.first_error_step = j;
      break;
    }
    if (finished) break;
  }
  return v;
}

JudgeVerdict Judge::base_verdict(const store::Trajectory& traj, env::Resolution res) const {
  return base_verdict(traj, store::digest(traj), res);
}

JudgeVerdict Judge::base_verdict(const store::Trajectory& traj, const std::string& traj_key,
                                 env::Resolution res) const {
  const std::string key = traj_key + "@" + resolution_key(res);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  JudgeVerdict v = compute(traj, res);
  std::lock_guard<std::mutex> lock(mu_);
  cache_.emplace(key, v);
  return v;
}

JudgeVerdict Judge::apply_noise(JudgeVerdict v, const JudgeProfile& profile, int round, const std::string& traj_key,
                                std::uint64_t trial) const {
  Rng rng(derive_seed(profile.seed, {hash_string(profile.id), static_cast<std::uint64_t>(round),
                                     hash_string(traj_key), trial}));
  const double flip = v.correctness ? profile.fn : profile.fp;
  if (rng.bernoulli(flip)) {
    v.correctness = !v.correctness;
    // A hallucinated success reports no failing step.
    if (v.correctness) v.first_error_step.reset();
  }
  return v;
}

JudgeVerdict Judge::judge_trajectory(const store::Trajectory& traj, const JudgeProfile& profile, int round,
                                     std::uint64_t trial) const {
  return judge_trajectory(traj, store::digest(traj), profile, round, trial);
}

JudgeVerdict Judge::judge_trajectory(const store::Trajectory& traj, const std::string& key,
                                     const JudgeProfile& profile, int round, std::uint64_t trial) const {
  profile.validate();
  return apply_noise(base_verdict(traj, key, profile.resolution), profile, round, key, trial);
}

JudgeVerdict Judge::run_schedule(const store::Trajectory& traj, const VoteSchedule& schedule,
                                 const std::vector<JudgeProfile>& profiles, std::uint64_t trial,
                                 int* rounds_executed) const {
  return run_schedule(traj, store::digest(traj), schedule, profiles, trial, rounds_executed);
}

JudgeVerdict Judge::run_schedule(const store::Trajectory& traj, const std::string& key, const VoteSchedule& schedule,
                                 const std::vector<JudgeProfile>& profiles, std::uint64_t trial,
                                 int* rounds_executed) const {
  schedule.validate();
  std::vector<const JudgeProfile*> members;
  for (const auto& id : schedule.ensemble) {
    auto it = std::find_if(profiles.begin(), profiles.end(), [&](const JudgeProfile& p) { return p.id == id; });
    if (it == profiles.end()) throw UnknownProfile(id);
    it->validate();
    members.push_back(&*it);
  }

  // Round order: ascending pixel count, ties by listed order.
  std::vector<int> order(schedule.k);
  for (int r = 0; r < schedule.k; ++r) order[r] = r;
  if (!schedule.resolutions.empty()) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const auto& ra = schedule.resolutions[a];
      const auto& rb = schedule.resolutions[b];
      return static_cast<long>(ra.width) * ra.height < static_cast<long>(rb.width) * rb.height;
    });
  }

  std::vector<JudgeVerdict> votes;
  int executed = 0;
  for (int r : order) {
    ++executed;
    bool failed = false;
    for (const JudgeProfile* p : members) {
      const env::Resolution res = schedule.resolutions.empty() ? p->resolution : schedule.resolutions[r];
      votes.push_back(apply_noise(base_verdict(traj, key, res), *p, r, key, trial));
      failed = failed || !votes.back().correctness;
    }
    if (failed) break;
  }
  if (rounds_executed != nullptr) *rounds_executed = executed;
  return unanimous_vote(votes);
}

JudgeVerdict unanimous_vote(const std::vector<JudgeVerdict>& verdicts) {
  if (verdicts.empty()) throw Error("invalid_argument", "no verdicts to vote on");
  JudgeVerdict out;
  out.correctness = true;
  std::set<int> redundant;
  for (const auto& v : verdicts) {
    out.correctness = out.correctness && v.correctness;
    redundant.insert(v.redundant.begin(), v.redundant.end());
    if (v.first_error_step && (!out.first_error_step || *v.first_error_step < *out.first_error_step)) {
      out.first_error_step = v.first_error_step;
    }
  }
  out.redundant.assign(redundant.begin(), redundant.end());
  return out;
}

std::optional<std::vector<Action>> label_positive_actions(const store::Trajectory& traj, const JudgeVerdict& verdict) {
  if (!verdict.clean()) return std::nullopt;
  std::vector<Action> out;
  for (const auto& s : traj.steps) out.push_back(s.action);
  return out;
}

PrecisionRecall precision_recall(const std::vector<bool>& predicted, const std::vector<bool>& truth) {
  if (predicted.size() != truth.size()) throw Error("invalid_argument", "prediction and truth lengths differ");
  PrecisionRecall r;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] && truth[i]) ++r.tp;
    else if (predicted[i]) ++r.fp;
    else if (truth[i]) ++r.fn;
    else ++r.tn;
  }
  if (r.tp + r.fp > 0) r.precision = static_cast<double>(r.tp) / (r.tp + r.fp);
  if (r.tp + r.fn > 0) r.recall = static_cast<double>(r.tp) / (r.tp + r.fn);
  return r;
}

namespace {

json resolution_json(env::Resolution r) { return json::array({r.width, r.height}); }
env::Resolution resolution_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

}  // namespace

JudgeEvalConfig JudgeEvalConfig::from_json(const json& j) {
  JudgeEvalConfig c;
  for (const auto& jp : j.at("profiles")) {
    JudgeProfile p;
    p.id = jp.at("id").get<std::string>();
    if (jp.contains("resolution")) p.resolution = resolution_from(jp["resolution"]);
    p.fp = jp.value("fp", 0.0);
    p.fn = jp.value("fn", 0.0);
    p.seed = jp.value("seed", std::uint64_t{0});
    p.validate();
    c.profiles.push_back(p);
  }
  for (const auto& js : j.at("strategies")) {
    Strategy s;
    s.name = js.at("name").get<std::string>();
    s.schedule.k = js.value("k", 4);
    if (js.contains("resolutions")) {
      for (const auto& r : js["resolutions"]) s.schedule.resolutions.push_back(resolution_from(r));
    }
    s.schedule.ensemble = js.at("ensemble").get<std::vector<std::string>>();
    s.schedule.validate();
    c.strategies.push_back(s);
  }
  c.trials = j.value("trials", 1);
  if (c.trials < 1) throw Error("invalid_config", "trials must be at least 1");
  return c;
}

json JudgeEvalConfig::to_json() const {
  json ps = json::array();
  for (const auto& p : profiles) {
    ps.push_back({{"id", p.id}, {"resolution", resolution_json(p.resolution)}, {"fp", p.fp}, {"fn", p.fn}, {"seed", p.seed}});
  }
  json ss = json::array();
  for (const auto& s : strategies) {
    json rs = json::array();
    for (const auto& r : s.schedule.resolutions) rs.push_back(resolution_json(r));
    ss.push_back({{"name", s.name}, {"k", s.schedule.k}, {"resolutions", rs}, {"ensemble", s.schedule.ensemble}});
  }
  return {{"profiles", ps}, {"strategies", ss}, {"trials", trials}};
}

std::vector<ReportRow> evaluate_strategies(const Judge& judge, const std::vector<store::Trajectory>& corpus,
                                           const JudgeEvalConfig& config) {
  std::vector<bool> truth;
  truth.reserve(corpus.size() * config.trials);
  for (const auto& t : corpus) {
    const bool ok = judge.oracle_success(t);
    for (int k = 0; k < config.trials; ++k) truth.push_back(ok);
  }
  std::vector<std::string> keys;
  for (const auto& t : corpus) keys.push_back(store::digest(t));
  std::vector<ReportRow> rows;
  for (const auto& s : config.strategies) {
    std::vector<bool> predicted;
    predicted.reserve(truth.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      for (int k = 0; k < config.trials; ++k) {
        predicted.push_back(judge.run_schedule(corpus[i], keys[i], s.schedule, config.profiles, k).correctness);
      }
    }
    rows.push_back({s.name, precision_recall(predicted, truth)});
  }
  return rows;
}

namespace {

std::string pct(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * *v);
  return buf;
}

}  // namespace

std::string report_text(const std::vector<ReportRow>& rows) {
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.strategy.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %9s  %6s\n", static_cast<int>(width), "Strategy", "Precision", "Recall");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %9s  %6s\n", static_cast<int>(width), r.strategy.c_str(),
                  pct(r.scores.precision).c_str(), pct(r.scores.recall).c_str());
    out << buf;
  }
  return out.str();
}

json report_json(const std::vector<ReportRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"strategy", r.strategy},
                   {"precision", r.scores.precision ? json(*r.scores.precision) : json(nullptr)},
                   {"recall", r.scores.recall ? json(*r.scores.recall) : json(nullptr)},
                   {"tp", r.scores.tp},
                   {"fp", r.scores.fp},
                   {"fn", r.scores.fn},
                   {"tn", r.scores.tn}});
  }
  return {{"rows", out}};
}

}  // namespace coda::judge

#include "coda/store/trajectory.hpp"

#include "coda/common/digest.hpp"

namespace coda::store {

using nlohmann::json;

namespace {

json rect(const env::Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }
env::Rect rect_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()}; }

}  // namespace

json to_json(const Plan& p) {
  return {{"type", to_string(p.type)}, {"target", p.target}, {"argument", p.argument}, {"rationale", p.rationale}};
}

Plan plan_from_json(const json& j) {
  Plan p;
  p.type = action_kind_from_string(j.at("type").get<std::string>());
  p.target = j.at("target").get<std::string>();
  p.argument = j.at("argument").get<std::string>();
  p.rationale = j.value("rationale", "");
  return p;
}

json to_json(const Action& a) {
  json j = {{"kind", to_string(a.kind)}};
  switch (a.kind) {
    case ActionKind::kClick:
    case ActionKind::kDoubleClick:
      j["x"] = a.x;
      j["y"] = a.y;
      break;
    case ActionKind::kType:
    case ActionKind::kHotkey:
      j["text"] = a.text;
      break;
    case ActionKind::kDrag:
      j["source"] = rect(a.source);
      j["destination"] = rect(a.destination);
      break;
    case ActionKind::kFinish:
      break;
  }
  return j;
}

Action action_from_json(const json& j) {
  Action a;
  a.kind = action_kind_from_string(j.at("kind").get<std::string>());
  a.x = j.value("x", 0);
  a.y = j.value("y", 0);
  a.text = j.value("text", "");
  if (j.contains("source")) a.source = rect_from(j["source"]);
  if (j.contains("destination")) a.destination = rect_from(j["destination"]);
  return a;
}

json to_json(const Trajectory& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json js = {{"obs", s.observation_digest}, {"plan", to_json(s.plan)}, {"action", to_json(s.action)}};
    if (s.grounding_failure) js["grounding_failure"] = true;
    steps.push_back(std::move(js));
  }
  return {{"unit", t.unit_id},
          {"sample", t.sample},
          {"task", t.task_id},
          {"software", t.software},
          {"policy_version", t.policy_version},
          {"seeds", {{"policy", t.policy_seed}, {"executor", t.executor_seed}, {"env", t.env_seed}}},
          {"resolution", {t.resolution.width, t.resolution.height}},
          {"max_steps", t.max_steps},
          {"steps", std::move(steps)},
          {"final_state", t.final_state_digest},
          {"oracle_success", t.oracle_success}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  t.unit_id = j.at("unit").get<std::string>();
  t.sample = j.at("sample").get<int>();
  t.task_id = j.at("task").get<std::string>();
  t.software = j.at("software").get<std::string>();
  t.policy_version = j.at("policy_version").get<std::string>();
  const auto& seeds = j.at("seeds");
  t.policy_seed = seeds.at("policy").get<std::uint64_t>();
  t.executor_seed = seeds.at("executor").get<std::uint64_t>();
  t.env_seed = seeds.at("env").get<std::uint64_t>();
  t.resolution = {j.at("resolution").at(0).get<int>(), j.at("resolution").at(1).get<int>()};
  t.max_steps = j.at("max_steps").get<int>();
  for (const auto& js : j.at("steps")) {
    Step s;
    s.observation_digest = js.at("obs").get<std::string>();
    s.plan = plan_from_json(js.at("plan"));
    s.action = action_from_json(js.at("action"));
    s.grounding_failure = js.value("grounding_failure", false);
    t.steps.push_back(std::move(s));
  }
  t.final_state_digest = j.at("final_state").get<std::string>();
  t.oracle_success = j.at("oracle_success").get<bool>();
  return t;
}

json to_json(const judge::JudgeVerdict& v) {
  json j = {{"correctness", v.correctness}, {"redundant", v.redundant}};
  j["first_error_step"] = v.first_error_step ? json(*v.first_error_step) : json(nullptr);
  return j;
}

judge::JudgeVerdict verdict_from_json(const json& j) {
  judge::JudgeVerdict v;
  v.correctness = j.at("correctness").get<bool>();
  v.redundant = j.at("redundant").get<std::vector<int>>();
  if (j.contains("first_error_step") && !j["first_error_step"].is_null()) {
    v.first_error_step = j["first_error_step"].get<int>();
  }
  return v;
}

std::string digest(const Trajectory& t) { return sha256_hex(to_json(t).dump()); }

}  // namespace coda::store

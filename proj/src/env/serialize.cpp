#include "coda/env/serialize.hpp"

#include <fstream>

namespace coda::env {

namespace {
const char* atom_kind(GoalAtom::Kind k) {
  switch (k) {
    case GoalAtom::Kind::kWidgetValueEquals:
      return "widget_value_equals";
    case GoalAtom::Kind::kScreenIs:
      return "screen_is";
    case GoalAtom::Kind::kToggleStateIs:
      return "toggle_state_is";
    case GoalAtom::Kind::kOrderedSubgoals:
      return "ordered_subgoals";
  }
  return "";
}
}  // namespace

nlohmann::json to_json(const GoalAtom& a) {
  nlohmann::json j = {{"kind", atom_kind(a.kind)}};
  switch (a.kind) {
    case GoalAtom::Kind::kWidgetValueEquals:
    case GoalAtom::Kind::kToggleStateIs:
      j["widget"] = a.widget;
      j["value"] = a.value;
      break;
    case GoalAtom::Kind::kScreenIs:
      j["screen"] = a.screen;
      break;
    case GoalAtom::Kind::kOrderedSubgoals:
      j["sequence"] = nlohmann::json::array();
      for (const auto& s : a.sequence) j["sequence"].push_back(to_json(s));
      break;
  }
  return j;
}

GoalAtom atom_from_json(const nlohmann::json& j) {
  const std::string k = j.at("kind");
  if (k == "widget_value_equals") return GoalAtom::value_equals(j.at("widget"), j.at("value"));
  if (k == "toggle_state_is") return GoalAtom::toggle_is(j.at("widget"), j.at("value") == "on");
  if (k == "screen_is") return GoalAtom::screen_is(j.at("screen"));
  if (k == "ordered_subgoals") {
    std::vector<GoalAtom> seq;
    for (const auto& s : j.at("sequence")) seq.push_back(atom_from_json(s));
    return GoalAtom::ordered(std::move(seq));
  }
  throw Error("parse_error", "unknown goal atom kind " + k);
}

nlohmann::json to_json(const GoalPredicate& g) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : g.atoms) j.push_back(to_json(a));
  return j;
}

GoalPredicate goal_from_json(const nlohmann::json& j) {
  GoalPredicate g;
  for (const auto& a : j) g.atoms.push_back(atom_from_json(a));
  return g;
}

nlohmann::json to_json(const Task& t) {
  return {{"id", t.id},         {"template", t.template_id}, {"instruction", t.instruction}, {"software", t.software},
          {"goal", to_json(t.goal)}, {"max_steps", t.max_steps},   {"seed", t.seed}};
}

Task task_from_json(const nlohmann::json& j) {
  try {
    Task t;
    t.id = j.at("id");
    t.template_id = j.value("template", "");
    t.instruction = j.at("instruction");
    t.software = j.at("software");
    t.goal = goal_from_json(j.at("goal"));
    t.max_steps = j.value("max_steps", kDefaultMaxSteps);
    t.seed = j.value("seed", std::uint64_t{0});
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", std::string("task: ") + e.what());
  }
}

nlohmann::json to_json(const WorldState& s) {
  return {{"software", s.software}, {"screen", s.screen}, {"values", s.values}, {"focus", s.focus}, {"step", s.step}};
}

WorldState state_from_json(const nlohmann::json& j) {
  WorldState s;
  s.software = j.at("software");
  s.screen = j.at("screen");
  s.values = j.at("values").get<std::vector<std::string>>();
  s.focus = j.at("focus");
  s.step = j.at("step");
  return s;
}

std::vector<Task> load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open suite " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", "suite " + path + ": " + e.what());
  }
  std::vector<Task> tasks;
  for (const auto& t : j.at("tasks")) tasks.push_back(task_from_json(t));
  return tasks;
}

void save_suite(const std::string& path, const std::vector<Task>& tasks) {
  nlohmann::json j = {{"tasks", nlohmann::json::array()}};
  for (const auto& t : tasks) j["tasks"].push_back(to_json(t));
  std::ofstream out(path);
  if (!out) throw Error("io_error", "cannot write suite " + path);
  out << j.dump(2) << '\n';
}

}  // namespace coda::env

#include "coda/env/goal.hpp"

#include <algorithm>

namespace coda::env {

GoalAtom GoalAtom::value_equals(std::string widget, std::string value) {
  GoalAtom a;
  a.kind = Kind::kWidgetValueEquals;
  a.widget = std::move(widget);
  a.value = std::move(value);
  return a;
}

GoalAtom GoalAtom::screen_is(std::string screen) {
  GoalAtom a;
  a.kind = Kind::kScreenIs;
  a.screen = std::move(screen);
  return a;
}

GoalAtom GoalAtom::toggle_is(std::string widget, bool on) {
  GoalAtom a;
  a.kind = Kind::kToggleStateIs;
  a.widget = std::move(widget);
  a.value = on ? "on" : "off";
  return a;
}

GoalAtom GoalAtom::ordered(std::vector<GoalAtom> atoms) {
  GoalAtom a;
  a.kind = Kind::kOrderedSubgoals;
  a.sequence = std::move(atoms);
  return a;
}

std::vector<std::string> GoalPredicate::widgets() const {
  std::vector<std::string> out;
  auto add = [&](const GoalAtom& a) {
    if (!a.widget.empty() && std::find(out.begin(), out.end(), a.widget) == out.end()) {
      out.push_back(a.widget);
    }
  };
  for (const auto& a : atoms) {
    add(a);
    for (const auto& s : a.sequence) add(s);
  }
  return out;
}

const std::string* StateValuation::value(const std::string& widget) const {
  const int i = model_.index_of(widget);
  return i < 0 ? nullptr : &state_.values[i];
}

bool atom_holds(const GoalAtom& atom, const Valuation& v) {
  switch (atom.kind) {
    case GoalAtom::Kind::kScreenIs:
      return v.screen() == atom.screen;
    case GoalAtom::Kind::kWidgetValueEquals:
    case GoalAtom::Kind::kToggleStateIs: {
      const std::string* value = v.value(atom.widget);
      return value && *value == atom.value;
    }
    case GoalAtom::Kind::kOrderedSubgoals:
      return false;
  }
  return false;
}

int advance_ordered(const GoalAtom& atom, int matched, const Valuation& v) {
  const int n = static_cast<int>(atom.sequence.size());
  while (matched < n && atom_holds(atom.sequence[matched], v)) ++matched;
  return matched;
}

bool evaluate(const GoalPredicate& goal, const std::vector<const Valuation*>& timeline) {
  if (goal.atoms.empty()) return true;
  if (timeline.empty()) return false;
  for (const auto& atom : goal.atoms) {
    if (atom.kind == GoalAtom::Kind::kOrderedSubgoals) {
      int matched = 0;
      for (const Valuation* v : timeline) matched = advance_ordered(atom, matched, *v);
      if (matched < static_cast<int>(atom.sequence.size())) return false;
    } else if (!atom_holds(atom, *timeline.back())) {
      return false;
    }
  }
  return true;
}

bool goal_check(const SoftwareModel& model, const WorldState& state, const GoalPredicate& goal,
                const std::vector<WorldState>& history) {
  std::vector<StateValuation> vals;
  vals.reserve(history.size() + 1);
  for (const auto& s : history) vals.emplace_back(model, s);
  if (history.empty() || !(history.back() == state)) vals.emplace_back(model, state);
  std::vector<const Valuation*> timeline;
  timeline.reserve(vals.size());
  for (const auto& v : vals) timeline.push_back(&v);
  return evaluate(goal, timeline);
}

}  // namespace coda::env

#pragma once

#include <string>
#include <vector>

#include "coda/env/software.hpp"

namespace coda::env {

struct GoalAtom {
  enum class Kind { kWidgetValueEquals, kScreenIs, kToggleStateIs, kOrderedSubgoals };
  Kind kind = Kind::kScreenIs;
  std::string widget;
  std::string value;   // expected value; "on"/"off" for toggles
  std::string screen;
  std::vector<GoalAtom> sequence;  // kOrderedSubgoals only; plain atoms

  static GoalAtom value_equals(std::string widget, std::string value);
  static GoalAtom screen_is(std::string screen);
  static GoalAtom toggle_is(std::string widget, bool on);
  static GoalAtom ordered(std::vector<GoalAtom> atoms);

  friend bool operator==(const GoalAtom&, const GoalAtom&) = default;
};

// Conjunction of atoms; the empty conjunction holds everywhere.
struct GoalPredicate {
  std::vector<GoalAtom> atoms;

  // Widget ids mentioned anywhere in the goal.
  std::vector<std::string> widgets() const;

  friend bool operator==(const GoalPredicate&, const GoalPredicate&) = default;
};

// A (possibly partial) valuation of a GUI snapshot. `value` returns nullptr
// when the value is unknown, which makes any atom on it unsatisfied.
class Valuation {
 public:
  virtual ~Valuation() = default;
  virtual const std::string& screen() const = 0;
  virtual const std::string* value(const std::string& widget) const = 0;
};

class StateValuation final : public Valuation {
 public:
  StateValuation(const SoftwareModel& model, const WorldState& state) : model_(model), state_(state) {}
  const std::string& screen() const override { return state_.screen; }
  const std::string* value(const std::string& widget) const override;

 private:
  const SoftwareModel& model_;
  const WorldState& state_;
};

// Truth of a plain (non-ordered) atom on one snapshot.
bool atom_holds(const GoalAtom& atom, const Valuation& v);

// Greedy in-order matching of an ordered-subgoal atom; consecutive subgoals
// may be matched on the same snapshot. Returns the new number matched.
int advance_ordered(const GoalAtom& atom, int matched, const Valuation& v);

// Evaluates the goal on a timeline of snapshots (oldest first). Plain atoms
// are checked on the last snapshot, ordered atoms across the whole timeline.
bool evaluate(const GoalPredicate& goal, const std::vector<const Valuation*>& timeline);

// `history` holds the episode's states in order; `state` is appended when it
// is not already the last element.
bool goal_check(const SoftwareModel& model, const WorldState& state, const GoalPredicate& goal,
                const std::vector<WorldState>& history);

}  // namespace coda::env

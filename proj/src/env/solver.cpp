#include "coda/env/solver.hpp"

#include <deque>
#include <string>
#include <unordered_set>

namespace coda::env {

Action perfect_action(const SoftwareModel& model, const WorldState& state, const Plan& plan) {
  (void)state;
  switch (plan.type) {
    case ActionKind::kClick:
    case ActionKind::kDoubleClick: {
      const Rect& b = model.widget(plan.target).bbox;
      return plan.type == ActionKind::kClick ? Action::click(b.center_x(), b.center_y())
                                             : Action::double_click(b.center_x(), b.center_y());
    }
    case ActionKind::kType:
      return Action::type(plan.argument);
    case ActionKind::kHotkey:
      return Action::hotkey(plan.argument);
    case ActionKind::kDrag:
      return Action::drag(model.widget(plan.target).bbox, model.widget(plan.argument).bbox);
    case ActionKind::kFinish:
      break;
  }
  return Action::finish();
}

std::vector<int> ordered_progress(const SoftwareModel& model, const GoalPredicate& goal,
                                  const std::vector<WorldState>& visited) {
  std::vector<int> progress;
  for (const auto& atom : goal.atoms) {
    if (atom.kind != GoalAtom::Kind::kOrderedSubgoals) continue;
    int matched = 0;
    for (const auto& s : visited) matched = advance_ordered(atom, matched, StateValuation(model, s));
    progress.push_back(matched);
  }
  return progress;
}

namespace {

struct Node {
  WorldState state;
  std::vector<int> progress;
  int parent;
  Plan plan;
};

bool satisfied(const GoalPredicate& goal, const SoftwareModel& model, const Node& n) {
  StateValuation v(model, n.state);
  std::size_t k = 0;
  for (const auto& atom : goal.atoms) {
    if (atom.kind == GoalAtom::Kind::kOrderedSubgoals) {
      if (n.progress[k++] < static_cast<int>(atom.sequence.size())) return false;
    } else if (!atom_holds(atom, v)) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::optional<std::vector<Plan>> solve(const SoftwareModel& model, const GoalPredicate& goal,
                                       const WorldState& start, std::vector<int> progress,
                                       SolverLimits limits) {
  const auto& widgets = model.widgets();
  std::vector<int> relevant;
  for (const auto& id : goal.widgets()) {
    const int i = model.index_of(id);
    if (i >= 0) relevant.push_back(i);
  }
  std::vector<int> menus;
  for (int i = 0; i < static_cast<int>(widgets.size()); ++i) {
    if (widgets[i].kind == WidgetKind::kMenu) menus.push_back(i);
  }
  std::vector<std::string> payloads;
  auto add_payload = [&](const GoalAtom& a) {
    if (a.kind != GoalAtom::Kind::kWidgetValueEquals) return;
    const int i = model.index_of(a.widget);
    if (i >= 0 && widgets[i].kind == WidgetKind::kTextField) payloads.push_back(a.value);
  };
  for (const auto& a : goal.atoms) {
    add_payload(a);
    for (const auto& s : a.sequence) add_payload(s);
  }

  auto key_of = [&](const Node& n) {
    std::string k = n.state.screen;
    k += '\x1f';
    k += std::to_string(n.state.focus);
    for (int i : relevant) {
      k += '\x1f';
      k += n.state.values[i];
    }
    for (int i : menus) k += n.state.values[i].empty() ? '0' : '1';
    for (int p : n.progress) {
      k += '\x1f';
      k += std::to_string(p);
    }
    return k;
  };

  std::vector<Node> nodes;
  std::vector<int> depth;
  nodes.push_back({start, std::move(progress), -1, {}});
  depth.push_back(0);
  if (satisfied(goal, model, nodes[0])) return std::vector<Plan>{};

  std::unordered_set<std::string> seen{key_of(nodes[0])};
  std::deque<int> frontier{0};
  while (!frontier.empty()) {
    const int cur = frontier.front();
    frontier.pop_front();
    if (depth[cur] >= limits.max_depth) continue;


    std::vector<Plan> moves;
    const WorldState s = nodes[cur].state;
    const std::vector<int> cur_progress = nodes[cur].progress;
    const int cur_depth = depth[cur];
    const auto visible = model.visible_widgets(s);
    for (int w : visible) {
      moves.push_back({ActionKind::kClick, widgets[w].id, "", ""});
      moves.push_back({ActionKind::kDoubleClick, widgets[w].id, "", ""});
    }
    if (s.focus >= 0) {
      for (const auto& p : payloads) moves.push_back({ActionKind::kType, widgets[s.focus].id, p, ""});
    }
    for (const auto& h : model.hotkeys()) moves.push_back({ActionKind::kHotkey, kNoTarget, h.key, ""});
    for (int src : visible) {
      if (widgets[src].kind != WidgetKind::kButton || widgets[src].effect.kind != ClickEffect::Kind::kNone) continue;
      for (int dst : visible) {
        if (dst == src) continue;
        if (widgets[dst].kind == WidgetKind::kCanvas || widgets[dst].kind == WidgetKind::kTextField) {
          moves.push_back({ActionKind::kDrag, widgets[src].id, widgets[dst].id, ""});
        }
      }
    }

    for (auto& plan : moves) {
      Node next{model.step(s, perfect_action(model, s, plan)), cur_progress, cur, plan};
      StateValuation v(model, next.state);
      std::size_t k = 0;
      for (const auto& atom : goal.atoms) {
        if (atom.kind == GoalAtom::Kind::kOrderedSubgoals) {
          next.progress[k] = advance_ordered(atom, next.progress[k], v);
          ++k;
        }
      }
      if (!seen.insert(key_of(next)).second) continue;
      const bool done = satisfied(goal, model, next);
      nodes.push_back(std::move(next));
      depth.push_back(cur_depth + 1);
      const int id = static_cast<int>(nodes.size()) - 1;
      if (done) {
        std::vector<Plan> path;
        for (int n = id; nodes[n].parent >= 0; n = nodes[n].parent) path.push_back(nodes[n].plan);
        return std::vector<Plan>(path.rbegin(), path.rend());
      }
      if (nodes.size() >= limits.max_nodes) return std::nullopt;
      frontier.push_back(id);
    }
  }
  return std::nullopt;
}

}  // namespace coda::env

#include "coda/env/task.hpp"

#include "coda/common/rng.hpp"
#include "coda/env/catalog.hpp"
#include "coda/env/solver.hpp"

namespace coda::env {

const std::vector<std::string>& builtin_templates() {
  static const std::vector<std::string> t = {"open_panel", "set_field", "toggle", "set_and_run", "drag", "two_fields"};
  return t;
}

namespace {

struct Draft {
  std::string instruction;
  GoalPredicate goal;
};

std::vector<const Widget*> on_screen(const SoftwareModel& m, const std::string& screen, WidgetKind kind,
                                     ClickEffect::Kind effect = ClickEffect::Kind::kNone) {
  std::vector<const Widget*> out;
  for (const auto& w : m.widgets()) {
    if (w.screen == screen && w.kind == kind && w.effect.kind == effect) out.push_back(&w);
  }
  return out;
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& xs) {
  return xs[rng.below(xs.size())];
}

std::optional<std::string> pick_value(Rng& rng, const SoftwareModel& m, const std::string& current) {
  std::vector<std::string> options;
  for (const auto& v : m.value_vocabulary()) {
    if (v != current) options.push_back(v);
  }
  if (options.empty()) return std::nullopt;
  return pick(rng, options);
}

std::optional<Draft> instantiate(const std::string& tpl, const SoftwareModel& m, Rng& rng) {
  const Screen& screen = m.screens()[rng.below(m.screens().size())];
  const std::string panel = "In the " + screen.title + " panel, ";
  if (tpl == "open_panel") {
    if (screen.id == m.screens().front().id) return std::nullopt;
    return Draft{"Open the " + screen.title + " panel", {{GoalAtom::screen_is(screen.id)}}};
  }
  if (tpl == "set_field") {
    const auto fields = on_screen(m, screen.id, WidgetKind::kTextField);
    if (fields.empty()) return std::nullopt;
    const Widget* f = pick(rng, fields);
    const auto v = pick_value(rng, m, f->value);
    if (!v) return std::nullopt;
    return Draft{panel + "set " + f->label + " to '" + *v + "'", {{GoalAtom::value_equals(f->id, *v)}}};
  }
  if (tpl == "toggle") {
    const auto toggles = on_screen(m, screen.id, WidgetKind::kToggle);
    if (toggles.empty()) return std::nullopt;
    const Widget* t = pick(rng, toggles);
    const bool on = t->value != "on";
    return Draft{panel + "turn " + (on ? "on " : "off ") + t->label, {{GoalAtom::toggle_is(t->id, on)}}};
  }
  if (tpl == "set_and_run") {
    const auto fields = on_screen(m, screen.id, WidgetKind::kTextField);
    const auto presses = on_screen(m, screen.id, WidgetKind::kButton, ClickEffect::Kind::kPress);
    if (fields.empty() || presses.empty()) return std::nullopt;
    const Widget* f = pick(rng, fields);
    const Widget* b = pick(rng, presses);
    const auto v = pick_value(rng, m, f->value);
    if (!v) return std::nullopt;
    auto set = GoalAtom::value_equals(f->id, *v);
    auto ran = GoalAtom::value_equals(b->id, "done");
    return Draft{panel + "set " + f->label + " to '" + *v + "', then press " + b->label,
                 {{GoalAtom::ordered({set, ran}), set, ran}}};
  }
  if (tpl == "drag") {
    const auto items = on_screen(m, screen.id, WidgetKind::kButton);
    const auto canvases = on_screen(m, screen.id, WidgetKind::kCanvas);
    if (items.empty() || canvases.empty()) return std::nullopt;
    const Widget* item = pick(rng, items);
    const Widget* canvas = pick(rng, canvases);
    return Draft{panel + "drag '" + item->label + "' onto " + canvas->label,
                 {{GoalAtom::value_equals(canvas->id, item->label)}}};
  }
  if (tpl == "two_fields") {
    const auto fields = on_screen(m, screen.id, WidgetKind::kTextField);
    if (fields.size() < 2) return std::nullopt;
    const std::size_t a = rng.below(fields.size());
    std::size_t b = rng.below(fields.size() - 1);
    if (b >= a) ++b;
    const auto va = pick_value(rng, m, fields[a]->value);
    const auto vb = pick_value(rng, m, fields[b]->value);
    if (!va || !vb) return std::nullopt;
    return Draft{panel + "set " + fields[a]->label + " to '" + *va + "' and " + fields[b]->label + " to '" + *vb + "'",
                 {{GoalAtom::value_equals(fields[a]->id, *va), GoalAtom::value_equals(fields[b]->id, *vb)}}};
  }
  throw Error("invalid_template", "unknown task template " + tpl);
}

}  // namespace

std::vector<Task> generate_tasks(const Catalog& catalog, const std::string& software,
                                 const std::vector<std::string>& templates, int n, std::uint64_t seed,
                                 int max_steps) {
  if (n < 1) throw Error("invalid_argument", "task count must be at least 1");
  if (templates.empty()) throw Error("invalid_argument", "template set is empty");
  if (max_steps < 2) throw Error("invalid_argument", "max steps must be at least 2");
  const SoftwareModel& model = catalog.model(software);
  const WorldState start = model.initial_state();

  std::vector<Task> tasks;
  tasks.reserve(n);
  for (int i = 0; i < n; ++i) {
    bool made = false;
    for (int attempt = 0; attempt < 64 && !made; ++attempt) {
      const std::uint64_t sub = derive_seed(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(attempt)});
      Rng rng(sub);
      const std::string& tpl = templates[rng.below(templates.size())];
      const auto draft = instantiate(tpl, model, rng);
      if (!draft) continue;
      // The goal must not already hold and must be reachable, leaving one
      // step for finish.
      const auto witness = solve(model, draft->goal, start, ordered_progress(model, draft->goal, {start}),
                                 {max_steps - 1, 200000});
      if (!witness || witness->empty()) continue;
      Task t;
      t.id = software + "-" + std::to_string(seed) + "-" + std::to_string(i);
      t.template_id = tpl;
      t.instruction = draft->instruction;
      t.software = software;
      t.goal = draft->goal;
      t.max_steps = max_steps;
      t.seed = sub;
      tasks.push_back(std::move(t));
      made = true;
    }
    if (!made) {
      throw Error("generation_failed", "no satisfiable task for " + software + " from the given templates");
    }
  }
  return tasks;
}

}  // namespace coda::env

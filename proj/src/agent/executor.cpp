#include "coda/agent/executor.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "coda/common/rng.hpp"

namespace coda::agent {

env::Rect to_native(const env::Rect& r, const env::Observation& obs) {
  const double sx = static_cast<double>(obs.native.width) / obs.resolution.width;
  const double sy = static_cast<double>(obs.native.height) / obs.resolution.height;
  return {static_cast<int>(std::lround(r.x * sx)), static_cast<int>(std::lround(r.y * sy)),
          std::max(1, static_cast<int>(std::lround(r.w * sx))), std::max(1, static_cast<int>(std::lround(r.h * sy)))};
}

namespace {

Grounding no_op(const std::string& target) {
  Grounding g;
  g.action = Action::hotkey("");
  g.failure = true;
  g.target = target;
  return g;
}

}  // namespace

Grounding ground(const Plan& plan, const env::Observation& obs, const GroundingNoise& noise, std::uint64_t seed) {
  Grounding g;
  switch (plan.type) {
    case ActionKind::kFinish:
      g.action = Action::finish();
      return g;
    case ActionKind::kHotkey:
      g.action = Action::hotkey(plan.argument);
      return g;
    case ActionKind::kType:
      g.action = Action::type(plan.argument);
      g.target = plan.target;
      return g;
    case ActionKind::kDrag: {
      const auto* from = obs.find(plan.target);
      const auto* to = obs.find(plan.argument);
      if (from == nullptr || to == nullptr) return no_op(plan.target);
      g.action = Action::drag(to_native(from->bbox, obs), to_native(to->bbox, obs));
      g.target = plan.target;
      return g;
    }
    case ActionKind::kClick:
    case ActionKind::kDoubleClick:
      break;
  }

  const auto* w = obs.find(plan.target);
  if (w == nullptr) return no_op(plan.target);
  Rng rng(seed);
  if (rng.bernoulli(noise.p_miss)) {
    std::vector<const env::WidgetView*> others;
    for (const auto& v : obs.widgets) {
      if (v.kind == w->kind && v.id != w->id) others.push_back(&v);
    }
    if (!others.empty()) {
      w = others[rng.below(others.size())];
      g.misgrounded = true;
    }
  }
  const env::Rect r = to_native(w->bbox, obs);
  const double jx = noise.sigma * rng.normal();
  const double jy = noise.sigma * rng.normal();
  const int x = std::clamp(static_cast<int>(std::lround(r.x + r.w / 2.0 + jx)), 0, obs.native.width - 1);
  const int y = std::clamp(static_cast<int>(std::lround(r.y + r.h / 2.0 + jy)), 0, obs.native.height - 1);
  g.action = plan.type == ActionKind::kClick ? Action::click(x, y) : Action::double_click(x, y);
  g.target = w->id;
  return g;
}

}  // namespace coda::agent

#include "coda/agent/features.hpp"

#include <algorithm>
#include <cctype>

#include "coda/env/text.hpp"

namespace coda::agent {

namespace {

using env::WidgetKind;

enum TypeFlag {
  kBias = 0,
  kAnyRelevant,
  kFocusedRelevant,
  kUnfocusedRelevantField,
  kRelevantToggle,
  kRelevantButton,
  kRelevantCanvas,
  kRepeatsLastType,
  kStepFraction,
  kViewChanged,
  kOnlyMenus,
  kMentionedDone,
  kFirstStep,
};

int target_group(ActionKind k) {
  switch (k) {
    case ActionKind::kClick:
      return 0;
    case ActionKind::kDoubleClick:
      return 1;
    case ActionKind::kType:
      return 2;
    case ActionKind::kDrag:
      return 3;
    default:
      return -1;
  }
}

bool is_drag_source(WidgetKind k) { return k == WidgetKind::kButton; }
bool is_drop_target(WidgetKind k) { return k == WidgetKind::kCanvas || k == WidgetKind::kTextField; }

bool contains(const std::vector<std::string>& xs, const std::string& x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

std::vector<std::string> lower_words(const std::string& text) {
  std::vector<std::string> out(1);
  for (char ch : text) {
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      out.back() += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!out.back().empty()) {
      out.emplace_back();
    }
  }
  return out;
}

// Whether the instruction's demand on a widget already looks met, judging
// only from what is on screen.
bool looks_satisfied(const env::WidgetView& w, const std::vector<std::string>& literals,
                     const std::string& desired_toggle) {
  if (!w.value) return false;
  const std::string& v = *w.value;
  switch (w.kind) {
    case WidgetKind::kTextField:
    case WidgetKind::kCanvas:
      return contains(literals, v);
    case WidgetKind::kToggle:
      return !desired_toggle.empty() && v == desired_toggle;
    case WidgetKind::kButton:
    case WidgetKind::kMenuItem:
      return v == "selected" || v == "done" || v == "placed";
    case WidgetKind::kMenu:
      return true;
  }
  return false;
}

}  // namespace

DecisionContext::DecisionContext(const env::Task& task, const History& history, const env::Observation& previous,
                                 const env::Observation& current, int software_slot)
    : task_(&task),
      history_(&history),
      current_(&current),
      slot_(software_slot),
      step_(static_cast<int>(history.size())),
      tokens_(env::content_tokens(task.instruction)),
      literals_(env::quoted_literals(task.instruction)),
      flags_(kTypeFlags, 0.0) {
  if (slot_ < 0 || slot_ >= kFeatureDim / kBlockDim) throw Error("invalid_argument", "software slot out of range");
  std::string desired_toggle;
  if (task.instruction.find("turn on ") != std::string::npos) desired_toggle = "on";
  if (task.instruction.find("turn off ") != std::string::npos) desired_toggle = "off";

  bool menu_visible = false;
  info_.reserve(current.widgets.size());
  for (const auto& w : current.widgets) {
    WidgetInfo wi;
    wi.overlap = env::token_overlap(tokens_, w.label);
    wi.relevant = wi.overlap > 0.0 && !looks_satisfied(w, literals_, desired_toggle);
    info_.push_back(wi);
    if (w.kind == WidgetKind::kMenu) menu_visible = true;
    if (wi.overlap > 0.0 && w.kind != WidgetKind::kMenu && looks_satisfied(w, literals_, desired_toggle)) {
      flags_[kMentionedDone] = 1.0;
    }
    if (w.focused && w.value) focused_value_ = *w.value;
    if (!wi.relevant) continue;
    nothing_relevant_ = false;
    flags_[kAnyRelevant] = 1.0;
    switch (w.kind) {
      case WidgetKind::kTextField:
        flags_[w.focused ? kFocusedRelevant : kUnfocusedRelevantField] = 1.0;
        break;
      case WidgetKind::kToggle:
        flags_[kRelevantToggle] = 1.0;
        break;
      case WidgetKind::kButton:
      case WidgetKind::kMenuItem:
        flags_[kRelevantButton] = 1.0;
        break;
      case WidgetKind::kCanvas:
        flags_[kRelevantCanvas] = 1.0;
        break;
      case WidgetKind::kMenu:
        break;
    }
  }
  flags_[kBias] = 1.0;
  flags_[kStepFraction] = task.max_steps > 0 ? static_cast<double>(step_) / task.max_steps : 0.0;
  flags_[kViewChanged] = previous == current ? 0.0 : 1.0;
  flags_[kOnlyMenus] = nothing_relevant_ && menu_visible && flags_[kMentionedDone] == 0.0 ? 1.0 : 0.0;
  flags_[kFirstStep] = history.empty() ? 1.0 : 0.0;
  const auto words = lower_words(task.instruction);
  for (std::size_t i = 0; i < kCueWords.size(); ++i) {
    if (contains(words, kCueWords[i])) cues_.push_back(static_cast<int>(i));
  }
  cues_.push_back(kCueCount - 1);
  if (!history.empty()) {
    has_last_ = true;
    last_type_ = history.back().plan.type;
    last_target_ = history.back().plan.target;
  }
}

int DecisionContext::view_index(const std::string& id) const {
  for (std::size_t i = 0; i < current_->widgets.size(); ++i) {
    if (current_->widgets[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const env::WidgetView& DecisionContext::view(const std::string& id) const {
  const int i = view_index(id);
  if (i < 0) throw Error("invalid_token", "widget " + id + " is not visible");
  return current_->widgets[i];
}

bool DecisionContext::relevant(const std::string& id) const {
  const int i = view_index(id);
  return i >= 0 && info_[i].relevant;
}

double DecisionContext::overlap(const std::string& id) const {
  const int i = view_index(id);
  return i < 0 ? 0.0 : info_[i].overlap;
}

std::vector<ActionKind> DecisionContext::legal_types() const {
  std::vector<ActionKind> out;
  const auto& ws = current_->widgets;
  const bool any = !ws.empty();
  const bool field = std::any_of(ws.begin(), ws.end(), [](const auto& w) { return w.kind == WidgetKind::kTextField; });
  bool drag = false;
  for (const auto& src : ws) {
    if (!is_drag_source(src.kind)) continue;
    for (const auto& dst : ws) {
      if (dst.id != src.id && is_drop_target(dst.kind)) drag = true;
    }
  }
  if (any) {
    out.push_back(ActionKind::kClick);
    out.push_back(ActionKind::kDoubleClick);
  }
  if (field) out.push_back(ActionKind::kType);
  out.push_back(ActionKind::kHotkey);
  if (drag) out.push_back(ActionKind::kDrag);
  out.push_back(ActionKind::kFinish);
  return out;
}

std::vector<std::string> DecisionContext::legal_targets(ActionKind type) const {
  std::vector<std::string> out;
  for (const auto& w : current_->widgets) {
    switch (type) {
      case ActionKind::kClick:
      case ActionKind::kDoubleClick:
        out.push_back(w.id);
        break;
      case ActionKind::kType:
        if (w.kind == WidgetKind::kTextField) out.push_back(w.id);
        break;
      case ActionKind::kDrag:
        if (is_drag_source(w.kind)) {
          for (const auto& d : current_->widgets) {
            if (d.id != w.id && is_drop_target(d.kind)) {
              out.push_back(w.id);
              break;
            }
          }
        }
        break;
      default:
        break;
    }
  }
  return out;
}

std::vector<std::string> DecisionContext::legal_arguments(ActionKind type, const std::string& target) const {
  std::vector<std::string> out;
  if (type == ActionKind::kType) {
    for (const auto& l : literals_) {
      if (!contains(out, l)) out.push_back(l);
    }
    for (const auto& d : kDistractorPayloads) {
      if (!contains(out, d)) out.push_back(d);
    }
  } else if (type == ActionKind::kHotkey) {
    out = kHotkeys;
  } else if (type == ActionKind::kDrag) {
    for (const auto& d : current_->widgets) {
      if (d.id != target && is_drop_target(d.kind)) out.push_back(d.id);
    }
  }
  return out;
}

SparseVector DecisionContext::features(const Candidate& c) const {
  SparseVector f;
  const int base = slot_ * kBlockDim;
  auto put = [&](int idx, double v) {
    if (v != 0.0) f.emplace_back(base + idx, v);
  };
  switch (c.position) {
    case Position::kType: {
      for (int cue : cues_) {
        for (int k = 0; k < kTypeFlags; ++k) {
          double v = flags_[k];
          if (k == kRepeatsLastType) v = has_last_ && last_type_ == c.type ? 1.0 : 0.0;
          put(type_feature(c.type, cue, k), v);
        }
      }
      break;
    }
    case Position::kTarget: {
      const int g = target_group(c.type);
      if (g < 0) throw Error("invalid_token", std::string("no target position for ") + to_string(c.type));
      const int i = view_index(c.target);
      if (i < 0) throw Error("invalid_token", "widget " + c.target + " is not visible");
      const auto& w = current_->widgets[i];
      const int off = kTargetOffset + g * kTargetGroupDim;
      const int kind = static_cast<int>(w.kind);
      put(off + 0, info_[i].overlap);
      put(off + 1, info_[i].relevant ? 1.0 : 0.0);
      put(off + 2 + kind, info_[i].relevant ? 1.0 : 0.0);
      put(off + 8 + kind, nothing_relevant_ ? 1.0 : 0.0);
      put(off + 14, w.focused ? 1.0 : 0.0);
      put(off + 15, has_last_ && last_target_ == w.id ? 1.0 : 0.0);
      break;
    }
    case Position::kArgument: {
      if (c.type == ActionKind::kType) {
        put(kPayloadOffset + 0, contains(literals_, c.value) ? 1.0 : 0.0);
        put(kPayloadOffset + 1, c.value == focused_value_ ? 1.0 : 0.0);
        put(kPayloadOffset + 2, 1.0);
      } else if (c.type == ActionKind::kHotkey) {
        const auto it = std::find(kHotkeys.begin(), kHotkeys.end(), c.value);
        if (it == kHotkeys.end()) throw Error("invalid_token", "unknown hotkey " + c.value);
        put(kHotkeyOffset + static_cast<int>(it - kHotkeys.begin()), 1.0);
      } else if (c.type == ActionKind::kDrag) {
        const int i = view_index(c.value);
        if (i < 0) throw Error("invalid_token", "widget " + c.value + " is not visible");
        const auto& w = current_->widgets[i];
        put(kDragDestOffset + 0, info_[i].overlap);
        put(kDragDestOffset + 1, info_[i].relevant ? 1.0 : 0.0);
        put(kDragDestOffset + 2, w.kind == WidgetKind::kCanvas ? 1.0 : 0.0);
        put(kDragDestOffset + 3, w.kind == WidgetKind::kTextField ? 1.0 : 0.0);
      } else {
        throw Error("invalid_token", std::string("no argument position for ") + to_string(c.type));
      }
      break;
    }
  }
  return f;
}

std::vector<double> DecisionContext::dense_features(const Candidate& c) const {
  std::vector<double> out(kFeatureDim, 0.0);
  for (const auto& [i, v] : features(c)) out[i] += v;
  return out;
}

}  // namespace coda::agent

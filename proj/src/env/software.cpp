#include "coda/env/software.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "coda/common/digest.hpp"

namespace coda::env {

namespace {

constexpr const char* kOpen = "open";
constexpr const char* kDone = "done";
constexpr const char* kSelected = "selected";
constexpr const char* kPlaced = "placed";

// Largest separation of two rectangles along either axis, in native pixels.
// Negative when they overlap on both axes.
double separation(const Rect& a, const Rect& b, double sx, double sy) {
  const double gx = std::max(b.x - (a.x + a.w), a.x - (b.x + b.w));
  const double gy = std::max(b.y - (a.y + a.h), a.y - (b.y + b.h));
  return std::max(gx * sx, gy * sy);
}

bool on_screen(const Widget& w, const std::string& screen) {
  return w.screen == kAllScreens || w.screen == screen;
}

}  // namespace

const WidgetView* Observation::find(const std::string& id) const {
  for (const auto& w : widgets) {
    if (w.id == id) return &w;
  }
  return nullptr;
}

SoftwareModel::SoftwareModel(std::string name, Resolution native, std::vector<Screen> screens,
                             std::vector<Widget> widgets, std::vector<Hotkey> hotkeys,
                             FocusMode focus_mode, std::vector<std::string> value_vocabulary)
    : name_(std::move(name)),
      native_(native),
      screens_(std::move(screens)),
      widgets_(std::move(widgets)),
      hotkeys_(std::move(hotkeys)),
      focus_mode_(focus_mode),
      vocabulary_(std::move(value_vocabulary)) {
  for (int i = 0; i < static_cast<int>(widgets_.size()); ++i) {
    if (!index_.emplace(widgets_[i].id, i).second) {
      throw Error("invalid_model", name_ + ": duplicate widget id " + widgets_[i].id);
    }
  }
  validate();
}

void SoftwareModel::validate() const {
  if (screens_.empty()) throw Error("invalid_model", name_ + ": no screens");
  std::set<std::string> ids;
  for (const auto& s : screens_) {
    if (!ids.insert(s.id).second) throw Error("invalid_model", name_ + ": duplicate screen " + s.id);
  }
  for (const auto& w : widgets_) {
    const auto& b = w.bbox;
    if (!b.valid() || b.x < 0 || b.y < 0 || b.x + b.w > native_.width || b.y + b.h > native_.height) {
      throw Error("invalid_model", name_ + ": bbox of " + w.id + " outside screen");
    }
    if (w.screen != kAllScreens && !screen(w.screen)) {
      throw Error("invalid_model", name_ + ": " + w.id + " on unknown screen " + w.screen);
    }
    if (w.kind == WidgetKind::kMenuItem) {
      const int p = index_of(w.parent_menu);
      if (p < 0 || widgets_[p].kind != WidgetKind::kMenu) {
        throw Error("invalid_model", name_ + ": menu item " + w.id + " without parent menu");
      }
    }
    if (w.effect.kind == ClickEffect::Kind::kNavigate && !screen(w.effect.screen)) {
      throw Error("invalid_model", name_ + ": " + w.id + " navigates to unknown screen");
    }
  }
  // Anything that can be on screen together must be at least two native
  // pixels apart, which keeps native renders lossless.
  for (const auto& s : screens_) {
    for (std::size_t i = 0; i < widgets_.size(); ++i) {
      if (!on_screen(widgets_[i], s.id)) continue;
      for (std::size_t j = i + 1; j < widgets_.size(); ++j) {
        if (!on_screen(widgets_[j], s.id)) continue;
        if (separation(widgets_[i].bbox, widgets_[j].bbox, 1.0, 1.0) <= 1.0) {
          throw Error("invalid_model", name_ + ": widgets " + widgets_[i].id + " and " +
                                           widgets_[j].id + " overlap on " + s.id);
        }
      }
    }
  }
}

int SoftwareModel::index_of(const std::string& widget_id) const {
  auto it = index_.find(widget_id);
  return it == index_.end() ? -1 : it->second;
}

const Widget& SoftwareModel::widget(const std::string& id) const {
  const int i = index_of(id);
  if (i < 0) throw Error("unknown_widget", name_ + ": unknown widget " + id);
  return widgets_[i];
}

const Screen* SoftwareModel::screen(const std::string& id) const {
  for (const auto& s : screens_) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

WorldState SoftwareModel::initial_state() const {
  WorldState s;
  s.software = name_;
  s.screen = screens_.front().id;
  s.values.reserve(widgets_.size());
  for (const auto& w : widgets_) s.values.push_back(w.value);
  refresh_nav(s);
  return s;
}

bool SoftwareModel::is_visible(const WorldState& s, int i) const {
  const Widget& w = widgets_[i];
  if (!on_screen(w, s.screen)) return false;
  if (w.kind == WidgetKind::kMenuItem) return s.values[index_of(w.parent_menu)] == kOpen;
  return w.visible;
}

std::vector<int> SoftwareModel::visible_widgets(const WorldState& s) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(widgets_.size()); ++i) {
    if (is_visible(s, i)) out.push_back(i);
  }
  return out;
}

int SoftwareModel::widget_at(const WorldState& s, int x, int y) const {
  for (int i = 0; i < static_cast<int>(widgets_.size()); ++i) {
    if (widgets_[i].bbox.contains(x, y) && is_visible(s, i)) return i;
  }
  return -1;
}

void SoftwareModel::refresh_nav(WorldState& s) const {
  for (std::size_t i = 0; i < widgets_.size(); ++i) {
    const auto& e = widgets_[i].effect;
    if (e.kind == ClickEffect::Kind::kNavigate) s.values[i] = e.screen == s.screen ? kSelected : "";
  }
}

void SoftwareModel::navigate(WorldState& s, const std::string& target) const {
  if (s.screen == target) return;
  s.screen = target;
  s.focus = -1;
  for (std::size_t i = 0; i < widgets_.size(); ++i) {
    if (widgets_[i].kind == WidgetKind::kMenu) s.values[i].clear();
  }
  refresh_nav(s);
}

void SoftwareModel::set_value(WorldState& s, int idx, std::string v) const {
  s.values[idx] = std::move(v);
  // Any edit of an input invalidates results produced on the same screen,
  // even when the written value is unchanged.
  const Widget& edited = widgets_[idx];
  for (std::size_t i = 0; i < widgets_.size(); ++i) {
    const Widget& w = widgets_[i];
    if (w.effect.kind == ClickEffect::Kind::kPress && s.values[i] == kDone &&
        (w.screen == edited.screen || w.screen == kAllScreens)) {
      s.values[i].clear();
    }
  }
}

void SoftwareModel::click(WorldState& s, int idx, bool twice) const {
  const Widget& w = widgets_[idx];
  const int repeats = twice ? 2 : 1;
  switch (w.kind) {
    case WidgetKind::kToggle:
      for (int r = 0; r < repeats; ++r) set_value(s, idx, s.values[idx] == "on" ? "off" : "on");
      break;
    case WidgetKind::kTextField:
      if (focus_mode_ == FocusMode::kClick || twice) s.focus = idx;
      break;
    case WidgetKind::kMenu:
      for (int r = 0; r < repeats; ++r) {
        const bool opening = s.values[idx] != kOpen;
        for (std::size_t i = 0; i < widgets_.size(); ++i) {
          if (widgets_[i].kind == WidgetKind::kMenu) s.values[i].clear();
        }
        if (opening) s.values[idx] = kOpen;
      }
      break;
    case WidgetKind::kMenuItem:
      s.values[index_of(w.parent_menu)].clear();
      [[fallthrough]];
    case WidgetKind::kButton:
      if (w.effect.kind == ClickEffect::Kind::kNavigate) {
        navigate(s, w.effect.screen);
      } else if (w.effect.kind == ClickEffect::Kind::kPress) {
        s.values[idx] = kDone;
      }
      break;
    case WidgetKind::kCanvas:
      break;
  }
}

WorldState SoftwareModel::step(const WorldState& in, const Action& a) const {
  WorldState s = in;
  switch (a.kind) {
    case ActionKind::kClick:
    case ActionKind::kDoubleClick: {
      const int idx = widget_at(s, a.x, a.y);
      if (idx >= 0) click(s, idx, a.kind == ActionKind::kDoubleClick);
      break;
    }
    case ActionKind::kType:
      if (s.focus >= 0 && is_visible(s, s.focus)) set_value(s, s.focus, a.text);
      break;
    case ActionKind::kHotkey:
      for (const auto& h : hotkeys_) {
        if (h.key != a.text) continue;
        if (h.kind == Hotkey::Kind::kCloseMenus) {
          for (std::size_t i = 0; i < widgets_.size(); ++i) {
            if (widgets_[i].kind == WidgetKind::kMenu) s.values[i].clear();
          }
        } else if (h.kind == Hotkey::Kind::kNextScreen) {
          std::size_t cur = 0;
          while (screens_[cur].id != s.screen) ++cur;
          navigate(s, screens_[(cur + 1) % screens_.size()].id);
        }
      }
      break;
    case ActionKind::kDrag: {
      const int src = widget_at(s, a.source.center_x(), a.source.center_y());
      const int dst = widget_at(s, a.destination.center_x(), a.destination.center_y());
      if (src < 0 || dst < 0 || src == dst) break;
      const Widget& from = widgets_[src];
      const Widget& to = widgets_[dst];
      const bool draggable = from.kind == WidgetKind::kButton && from.effect.kind == ClickEffect::Kind::kNone;
      const bool droppable = to.kind == WidgetKind::kCanvas || to.kind == WidgetKind::kTextField;
      if (draggable && droppable) {
        set_value(s, dst, from.label);
        s.values[src] = kPlaced;
      }
      break;
    }
    case ActionKind::kFinish:
      break;
  }
  ++s.step;
  return s;
}

Observation render(const SoftwareModel& model, const WorldState& state, Resolution res) {
  const Resolution native = model.native();
  if (res.width < 64) {
    throw InvalidResolution("resolution width " + std::to_string(res.width) + " below 64");
  }
  const long expected_h = std::lround(static_cast<double>(res.width) * native.height / native.width);
  if (res.width > native.width || std::abs(expected_h - res.height) > 1) {
    throw InvalidResolution("resolution " + std::to_string(res.width) + "x" +
                            std::to_string(res.height) + " does not preserve native aspect");
  }
  const double sx = static_cast<double>(res.width) / native.width;
  const double sy = static_cast<double>(res.height) / native.height;

  Observation o;
  o.software = model.name();
  o.screen = state.screen;
  o.resolution = res;
  o.native = native;
  const auto visible = model.visible_widgets(state);
  std::vector<bool> blanked(visible.size(), false);
  for (std::size_t i = 0; i < visible.size(); ++i) {
    for (std::size_t j = i + 1; j < visible.size(); ++j) {
      // Elements no more than one rendered pixel apart cannot be told apart.
      if (separation(model.widgets()[visible[i]].bbox, model.widgets()[visible[j]].bbox, sx, sy) <= 1.0) {
        blanked[i] = blanked[j] = true;
      }
    }
  }
  o.widgets.reserve(visible.size());
  for (std::size_t i = 0; i < visible.size(); ++i) {
    const Widget& w = model.widgets()[visible[i]];
    WidgetView v;
    v.id = w.id;
    v.kind = w.kind;
    v.bbox = Rect{static_cast<int>(std::lround(w.bbox.x * sx)), static_cast<int>(std::lround(w.bbox.y * sy)),
                  std::max(1, static_cast<int>(std::lround(w.bbox.w * sx))),
                  std::max(1, static_cast<int>(std::lround(w.bbox.h * sy)))};
    v.label = w.label;
    if (!blanked[i]) v.value = state.values[visible[i]];
    v.focused = state.focus == visible[i];
    o.widgets.push_back(std::move(v));
  }
  return o;
}

std::string canonical(const WorldState& s) {
  nlohmann::json j = {{"software", s.software}, {"screen", s.screen}, {"values", s.values},
                      {"focus", s.focus}, {"step", s.step}};
  return j.dump();
}

std::string canonical(const Observation& o) {
  nlohmann::json widgets = nlohmann::json::array();
  for (const auto& w : o.widgets) {
    widgets.push_back({w.id, to_string(w.kind), w.bbox.x, w.bbox.y, w.bbox.w, w.bbox.h, w.label,
                       w.value ? nlohmann::json(*w.value) : nlohmann::json(nullptr), w.focused});
  }
  nlohmann::json j = {{"software", o.software},
                      {"screen", o.screen},
                      {"resolution", {o.resolution.width, o.resolution.height}},
                      {"widgets", widgets}};
  return j.dump();
}

std::string digest(const WorldState& s) { return sha256_hex(canonical(s)); }
std::string digest(const Observation& o) { return sha256_hex(canonical(o)); }

}  // namespace coda::env

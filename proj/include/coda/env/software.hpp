#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coda/env/action.hpp"
#include "coda/env/types.hpp"

namespace coda::env {

// Latent simulator state s_t. Widget values are indexed like
// SoftwareModel::widgets().
struct WorldState {
  std::string software;
  std::string screen;
  std::vector<std::string> values;
  int focus = -1;  // widget index of the focused text field
  int step = 0;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct WidgetView {
  std::string id;
  WidgetKind kind = WidgetKind::kButton;
  Rect bbox;  // in observation pixels
  std::string label;
  // nullopt when the value cannot be read at this resolution.
  std::optional<std::string> value;
  bool focused = false;

  friend bool operator==(const WidgetView&, const WidgetView&) = default;
};

// Rendered view o_t of a WorldState at some resolution.
struct Observation {
  std::string software;
  std::string screen;
  Resolution resolution;
  Resolution native;
  std::vector<WidgetView> widgets;

  const WidgetView* find(const std::string& id) const;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Screen {
  std::string id;
  std::string title;
};

class SoftwareModel {
 public:
  SoftwareModel(std::string name, Resolution native, std::vector<Screen> screens,
                std::vector<Widget> widgets, std::vector<Hotkey> hotkeys, FocusMode focus_mode,
                std::vector<std::string> value_vocabulary);

  const std::string& name() const { return name_; }
  Resolution native() const { return native_; }
  const std::vector<Screen>& screens() const { return screens_; }
  const std::vector<Widget>& widgets() const { return widgets_; }
  const std::vector<Hotkey>& hotkeys() const { return hotkeys_; }
  FocusMode focus_mode() const { return focus_mode_; }
  const std::vector<std::string>& value_vocabulary() const { return vocabulary_; }

  int index_of(const std::string& widget_id) const;  // -1 when absent
  const Widget& widget(const std::string& id) const;
  const Screen* screen(const std::string& id) const;

  WorldState initial_state() const;

  bool is_visible(const WorldState& s, int widget_index) const;
  std::vector<int> visible_widgets(const WorldState& s) const;
  // Visible widget whose native bbox contains the point, or -1.
  int widget_at(const WorldState& s, int x, int y) const;

  // Total, deterministic transition. Always increments the step counter.
  WorldState step(const WorldState& s, const Action& a) const;

 private:
  void validate() const;
  void click(WorldState& s, int idx, bool twice) const;
  void navigate(WorldState& s, const std::string& screen) const;
  void set_value(WorldState& s, int idx, std::string v) const;
  void refresh_nav(WorldState& s) const;

  std::string name_;
  Resolution native_;
  std::vector<Screen> screens_;
  std::vector<Widget> widgets_;
  std::vector<Hotkey> hotkeys_;
  FocusMode focus_mode_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, int> index_;
};

// Renders at `res`. Throws InvalidResolution when res.width < 64 or the
// aspect ratio departs from native by more than one pixel of rounding.
Observation render(const SoftwareModel& model, const WorldState& state, Resolution res);

// Stable textual form of a state, the basis for its digest.
std::string canonical(const WorldState& s);
std::string canonical(const Observation& o);
std::string digest(const WorldState& s);
std::string digest(const Observation& o);

}  // namespace coda::env

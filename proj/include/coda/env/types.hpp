#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coda/common/error.hpp"

namespace coda::env {

enum class WidgetKind { kButton, kTextField, kToggle, kMenu, kMenuItem, kCanvas };

inline constexpr int kWidgetKindCount = 6;

const char* to_string(WidgetKind k);
WidgetKind widget_kind_from_string(const std::string& s);

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
  bool valid() const { return w > 0 && h > 0; }
  int center_x() const { return x + w / 2; }
  int center_y() const { return y + h / 2; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

// Intersection-over-union of two rectangles; 0 when either is degenerate.
double iou(const Rect& a, const Rect& b);

struct Resolution {
  int width = 0;
  int height = 0;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

// What clicking a widget does, beyond its kind's built-in behaviour.
struct ClickEffect {
  enum class Kind { kNone, kNavigate, kPress };
  Kind kind = Kind::kNone;
  std::string screen;  // kNavigate target
};

// Which click flavour moves keyboard focus into a text field.
enum class FocusMode { kClick, kDoubleClick };

struct Widget {
  std::string id;
  WidgetKind kind = WidgetKind::kButton;
  Rect bbox;
  std::string label;
  std::string value;  // initial value
  // Visible whenever its screen is active. Menu items are not; they appear
  // while their parent menu is open.
  bool visible = true;
  std::string screen;       // owning screen id, "*" for all screens
  std::string parent_menu;  // menu items only
  ClickEffect effect;
};

inline constexpr const char* kAllScreens = "*";

struct Hotkey {
  enum class Kind { kNone, kCloseMenus, kNextScreen };
  std::string key;
  Kind kind = Kind::kNone;
};

class InvalidResolution : public Error {
 public:
  explicit InvalidResolution(const std::string& m) : Error("invalid_resolution", m) {}
};

class UnknownSoftware : public Error {
 public:
  explicit UnknownSoftware(const std::string& name)
      : Error("unknown_software", "unknown software: " + name) {}
};

}  // namespace coda::env

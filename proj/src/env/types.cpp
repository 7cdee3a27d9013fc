#include "coda/env/types.hpp"
#include "coda/env/action.hpp"

#include <algorithm>
#include <array>

namespace coda {

namespace {
constexpr std::array<const char*, kActionKindCount> kActionNames = {
    "click", "double_click", "type", "hotkey", "drag", "finish"};
}

const char* to_string(ActionKind k) { return kActionNames[static_cast<int>(k)]; }

ActionKind action_kind_from_string(const std::string& s) {
  for (int i = 0; i < kActionKindCount; ++i) {
    if (s == kActionNames[i]) return static_cast<ActionKind>(i);
  }
  throw Error("parse_error", "unknown action kind: " + s);
}

}  // namespace coda

namespace coda::env {

namespace {
constexpr std::array<const char*, kWidgetKindCount> kWidgetNames = {
    "button", "text_field", "toggle", "menu", "menu_item", "canvas"};
}

const char* to_string(WidgetKind k) { return kWidgetNames[static_cast<int>(k)]; }

WidgetKind widget_kind_from_string(const std::string& s) {
  for (int i = 0; i < kWidgetKindCount; ++i) {
    if (s == kWidgetNames[i]) return static_cast<WidgetKind>(i);
  }
  throw Error("parse_error", "unknown widget kind: " + s);
}

double iou(const Rect& a, const Rect& b) {
  if (!a.valid() || !b.valid()) return 0.0;
  const int ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const int iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = static_cast<double>(ix) * iy;
  const double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
  return inter / uni;
}

}  // namespace coda::env

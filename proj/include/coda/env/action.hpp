#pragma once

#include <string>

#include "coda/env/types.hpp"

namespace coda {

// Shared between the plan's action-type token and the executed action.
enum class ActionKind { kClick, kDoubleClick, kType, kHotkey, kDrag, kFinish };

inline constexpr int kActionKindCount = 6;

const char* to_string(ActionKind k);
ActionKind action_kind_from_string(const std::string& s);

// An executable GUI action in native screen pixels.
struct Action {
  ActionKind kind = ActionKind::kFinish;
  int x = 0;
  int y = 0;
  std::string text;
  env::Rect source;
  env::Rect destination;

  static Action click(int x, int y) { return {ActionKind::kClick, x, y, {}, {}, {}}; }
  static Action double_click(int x, int y) { return {ActionKind::kDoubleClick, x, y, {}, {}, {}}; }
  static Action type(std::string text) { return {ActionKind::kType, 0, 0, std::move(text), {}, {}}; }
  static Action hotkey(std::string key) { return {ActionKind::kHotkey, 0, 0, std::move(key), {}, {}}; }
  static Action drag(env::Rect from, env::Rect to) { return {ActionKind::kDrag, 0, 0, {}, from, to}; }
  static Action finish() { return {}; }

  friend bool operator==(const Action&, const Action&) = default;
};

}  // namespace coda

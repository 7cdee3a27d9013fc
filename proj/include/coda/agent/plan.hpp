#pragma once

#include <string>
#include <vector>

#include "coda/env/action.hpp"

namespace coda {

inline constexpr const char* kNoTarget = "NONE";

// Structured planner thought p_t. Only the decision tokens carry probability;
// the rationale is free text.
struct Plan {
  ActionKind type = ActionKind::kFinish;
  std::string target = kNoTarget;  // widget id, NONE for finish/hotkey
  std::string argument;            // payload, hotkey, or drag destination id
  std::string rationale;

  // Number of decision tokens |p|: finish 1, click/double_click/hotkey 2,
  // type/drag 3.
  int token_count() const;

  bool same_decision(const Plan& o) const {
    return type == o.type && target == o.target && argument == o.argument;
  }
  friend bool operator==(const Plan&, const Plan&) = default;
};

inline int Plan::token_count() const {
  switch (type) {
    case ActionKind::kFinish:
      return 1;
    case ActionKind::kClick:
    case ActionKind::kDoubleClick:
    case ActionKind::kHotkey:
      return 2;
    case ActionKind::kType:
    case ActionKind::kDrag:
      return 3;
  }
  return 1;
}

// History m_t: (plan, action) pairs of the steps taken so far.
struct HistoryEntry {
  Plan plan;
  Action action;
};
using History = std::vector<HistoryEntry>;

}  // namespace coda

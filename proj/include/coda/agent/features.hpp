#pragma once

#include <string>
#include <utility>
#include <vector>

#include "coda/agent/plan.hpp"
#include "coda/env/software.hpp"
#include "coda/env/task.hpp"

namespace coda::agent {

// Feature map layout. Every application owns one block of kBlockDim
// weights; a context only activates the block of its own application, so
// what a planner learns on one application does not move its behaviour on
// another. Inside a block:
//
//   [0, 468)    action-type token: one-hot(type) x instruction cue x [bias,
//               any-relevant-visible, focused-field-relevant,
//               unfocused-relevant-field-visible, relevant-toggle-visible,
//               relevant-button-visible, relevant-canvas-visible,
//               repeats-last-type, step-fraction t/T,
//               view-changed-since-previous-step, only-menus-to-explore,
//               mentioned-widget-looks-done, first-step].
//               Cues are the words of kCueWords found in the instruction, or
//               a catch-all cue when none is; every present cue fires.
//   [468, 532)  target token, one group of 16 per targeted type (click,
//               double_click, type, drag): instruction/label overlap, relevant,
//               kind one-hot x relevant, kind one-hot x nothing-relevant-visible,
//               focused, repeats-last-target
//   [532, 535)  type payload: literal-from-instruction, equals-current-value, bias
//   [535, 539)  hotkey one-hot over kHotkeys
//   [539, 543)  drag destination: overlap, relevant, is-canvas, is-text-field
inline constexpr int kTypeFlags = 13;
inline constexpr int kCueCount = 6;
inline constexpr int kTypeRowDim = kCueCount * kTypeFlags;
inline constexpr int kTargetGroupDim = 16;
inline constexpr int kTargetOffset = kActionKindCount * kTypeRowDim;
inline constexpr int kPayloadOffset = kTargetOffset + 4 * kTargetGroupDim;
inline constexpr int kHotkeyOffset = kPayloadOffset + 3;
inline constexpr int kDragDestOffset = kHotkeyOffset + 4;
inline constexpr int kBlockDim = kDragDestOffset + 4;
inline constexpr int kFeatureDim = kBlockDim * 4;
inline constexpr const char* kFeatureMapVersion = "block-linear-v3/d2172";

// Instruction words that select a block of type-position features; the
// last cue index is the catch-all.
inline const std::vector<std::string> kCueWords = {"set", "turn", "drag", "open", "press"};

// Index inside a block of the type-position feature (type, cue, flag).
inline constexpr int type_feature(ActionKind type, int cue, int flag) {
  return static_cast<int>(type) * kTypeRowDim + cue * kTypeFlags + flag;
}

// Hotkeys the planner knows how to press.
inline const std::vector<std::string> kHotkeys = {"escape", "ctrl+tab", "ctrl+s", "enter"};

// Extra type payloads offered next to the instruction's quoted literals.
inline const std::vector<std::string> kDistractorPayloads = {"0", "1"};

using SparseVector = std::vector<std::pair<int, double>>;

// Decision position inside a plan.
enum class Position { kType = 0, kTarget = 1, kArgument = 2 };

// One candidate token at a decision position, with its prefix.
struct Candidate {
  Position position = Position::kType;
  ActionKind type = ActionKind::kFinish;
  std::string target;  // widget id (target/argument positions)
  std::string value;   // argument token
};

// Everything the planner conditions on at one step: task instruction,
// history m_{t-1}, previous and current observations.
class DecisionContext {
 public:
  DecisionContext(const env::Task& task, const History& history, const env::Observation& previous,
                  const env::Observation& current, int software_slot);

  const env::Task& task() const { return *task_; }
  const History& history() const { return *history_; }
  const env::Observation& current() const { return *current_; }
  int slot() const { return slot_; }

  std::vector<ActionKind> legal_types() const;
  std::vector<std::string> legal_targets(ActionKind type) const;
  std::vector<std::string> legal_arguments(ActionKind type, const std::string& target) const;

  // Sparse feature vector (global indices into [0, kFeatureDim)).
  SparseVector features(const Candidate& c) const;
  std::vector<double> dense_features(const Candidate& c) const;

  bool relevant(const std::string& widget_id) const;
  double overlap(const std::string& widget_id) const;

 private:
  struct WidgetInfo {
    double overlap = 0.0;
    bool relevant = false;
  };
  const env::WidgetView& view(const std::string& id) const;
  int view_index(const std::string& id) const;

  const env::Task* task_;
  const History* history_;
  const env::Observation* current_;
  int slot_;
  int step_;
  std::vector<std::string> tokens_;
  std::vector<std::string> literals_;
  std::vector<WidgetInfo> info_;  // parallel to current().widgets
  std::vector<double> flags_;     // context flags for the type position
  std::vector<int> cues_;
  bool nothing_relevant_ = true;
  std::string focused_value_;
  ActionKind last_type_ = ActionKind::kFinish;
  bool has_last_ = false;
  std::string last_target_;
};

}  // namespace coda::agent

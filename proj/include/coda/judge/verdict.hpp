#pragma once

#include <optional>
#include <vector>

namespace coda::judge {

struct JudgeVerdict {
  bool correctness = false;
  std::vector<int> redundant;           // 1-based step indices, increasing
  std::optional<int> first_error_step;  // 1-based

  bool clean() const { return correctness && redundant.empty() && !first_error_step; }
  friend bool operator==(const JudgeVerdict&, const JudgeVerdict&) = default;
};

}  // namespace coda::judge

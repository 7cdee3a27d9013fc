#pragma once

#include <cstdint>
#include <string>

#include "coda/agent/plan.hpp"
#include "coda/env/software.hpp"

namespace coda::agent {

struct GroundingNoise {
  double sigma = 2.0;    // click jitter std-dev in native pixels
  double p_miss = 0.02;  // chance a click lands on another widget of the same kind

  friend bool operator==(const GroundingNoise&, const GroundingNoise&) = default;
};

struct Grounding {
  Action action;
  bool failure = false;    // plan target not in the observation
  bool misgrounded = false;
  std::string target;      // widget actually aimed at
};

// Maps a plan to a concrete action on the current observation. Deterministic
// in seed.
Grounding ground(const Plan& plan, const env::Observation& obs, const GroundingNoise& noise, std::uint64_t seed);

// Observation rect scaled to native coordinates.
env::Rect to_native(const env::Rect& r, const env::Observation& obs);

}  // namespace coda::agent

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "swapmc/semantics.hpp"

namespace swapmc {

struct SimStep {
    State state;
    ActionProfile actions;  // profile taken out of `state`; empty on the last step
};

// Pseudorandom walk of `steps` transitions from an initial state satisfying
// `start` (any initial state when absent).  Each choice is uniform over the
// full (profile, successor) list, so a seed always replays the same run.
// Throws std::invalid_argument when no initial state satisfies `start`.
std::vector<SimStep> simulate(const Model& m, std::uint64_t seed, int steps, const std::optional<Expr>& start = {});

}  // namespace swapmc

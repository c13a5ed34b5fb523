#pragma once

#include <string>
#include <string_view>

#include "rlao/abstraction.hpp"
#include "rlao/mdp.hpp"

namespace rlao {

// JSON documents for models. Malformed input throws ConfigError.
//
// MDP:         {"n_states", "n_actions", "reward": [s*A + a],
//               "transition": [(s*A + a)*S + s'], "r_max", "start_state"?}
// Abstraction: {"map": [...], "n_abstract"}
// Weighting:   {"n_states", "n_actions", "weights": [s*A + a]}

std::string mdp_to_json(const GroundMDP& m, int indent = -1);
GroundMDP mdp_from_json(std::string_view text);

std::string abstraction_to_json(const Abstraction& phi, int indent = -1);
Abstraction abstraction_from_json(std::string_view text);

std::string weighting_to_json(const WeightingFn& w, int indent = -1);
WeightingFn weighting_from_json(std::string_view text);

}  // namespace rlao

#pragma once

// Slow, independent reference computations used by the unit and
// acceptance tests. None of these share code paths with the library's
// solvers beyond the model types.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rlao/abstraction.hpp"
#include "rlao/dependence.hpp"
#include "rlao/mdp.hpp"

namespace rlao::oracle {

/// h-step value by plain recursion over successors.
double value_recursive(const TabularModel& m, const Policy& pi, StateIndex s, int h);
/// Optimal h-step value by plain recursion with a max over actions.
double optimal_recursive(const TabularModel& m, StateIndex s, int h);
/// Discounted value of a stationary policy by Gaussian elimination on (I - gamma P) v = r.
std::vector<double> discounted_policy_value(const TabularModel& m, const Policy& pi, double gamma);

/// Laws of the first two visit outcomes, by enumerating paths up to
/// `max_steps`. `tail` is the probability mass of paths cut off before the
/// second visit that could still have produced one.
struct VisitLaw {
    std::vector<double> first;
    std::vector<double> second;
    std::vector<std::vector<double>> joint;  // [u][v]
    double tail = 0.0;
};
VisitLaw visit_law_by_paths(const TabularModel& m, const Abstraction& phi, StateIndex start, TargetPair target,
                            const AbstractBehavior& behavior, int max_steps);

/// E[Z_k | Z_1..Z_{k-1} = history] by path enumeration; also returns the
/// history probability through `probability`. Paths are cut at `max_steps`.
double residual_by_paths(const TabularModel& m, const Abstraction& phi, StateIndex start, TargetPair target,
                         const std::vector<double>& z, const std::vector<double>& history,
                         const AbstractBehavior& behavior, int max_steps, double* probability);

/// Abstract model built entry by entry from the definition.
TabularModel abstract_by_definition(const TabularModel& m, const Abstraction& phi, const WeightingFn& w);

/// Smallest m >= 1 with pred(m), by linear scan up to `limit`; -1 if none.
std::int64_t first_passing(std::int64_t limit, const std::function<bool(std::int64_t)>& pred);

/// Random model with dense rows, for property tests.
GroundMDP dense_random_mdp(int n_states, int n_actions, std::uint64_t seed);
/// Random surjective map of n states onto k blocks, canonical order.
Abstraction random_abstraction(int n_states, int k, std::uint64_t seed);

}  // namespace rlao::oracle

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rlao {

using StateIndex = int;
using ActionIndex = int;

/// Dense tabular model: transition tensor row-major by (s, a, s') and a
/// deterministic reward table row-major by (s, a).
///
/// Shared storage for ground MDPs and abstract models; planners work on
/// either through this base.
struct TabularModel {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> transition;
    std::vector<double> reward;
    double r_max = 1.0;

    TabularModel() = default;
    TabularModel(int states, int actions, double rmax);

    [[nodiscard]] std::span<const double> row(StateIndex s, ActionIndex a) const {
        return {transition.data() + row_offset(s, a), static_cast<std::size_t>(n_states)};
    }
    [[nodiscard]] std::span<double> row(StateIndex s, ActionIndex a) {
        return {transition.data() + row_offset(s, a), static_cast<std::size_t>(n_states)};
    }
    [[nodiscard]] double T(StateIndex s, ActionIndex a, StateIndex next) const {
        return transition[row_offset(s, a) + static_cast<std::size_t>(next)];
    }
    [[nodiscard]] double R(StateIndex s, ActionIndex a) const {
        return reward[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                      static_cast<std::size_t>(a)];
    }
    double& R(StateIndex s, ActionIndex a) {
        return reward[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                      static_cast<std::size_t>(a)];
    }

    [[nodiscard]] bool valid_state(StateIndex s) const noexcept { return s >= 0 && s < n_states; }
    [[nodiscard]] bool valid_action(ActionIndex a) const noexcept { return a >= 0 && a < n_actions; }

    /// Throws InvalidArgument when the table sizes disagree with the declared dimensions.
    void check_shape() const;

private:
    [[nodiscard]] std::size_t row_offset(StateIndex s, ActionIndex a) const {
        return (static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions) +
                static_cast<std::size_t>(a)) *
               static_cast<std::size_t>(n_states);
    }
};

/// Finite MDP with an optional designated start state. The discount is not
/// part of the model; planners take it per call.
struct GroundMDP : TabularModel {
    std::optional<StateIndex> start_state;

    GroundMDP() = default;
    GroundMDP(int states, int actions, double rmax) : TabularModel(states, actions, rmax) {}
    explicit GroundMDP(TabularModel base, std::optional<StateIndex> start = std::nullopt)
        : TabularModel(std::move(base)), start_state(start) {}
};

/// Deterministic policy. Stationary policies map state -> action;
/// nonstationary ones map (state, remaining steps) -> action with remaining
/// steps in [1, horizon].
class Policy {
public:
    static Policy stationary(std::vector<ActionIndex> actions);
    /// `table[k - 1][s]` is the action with k steps remaining.
    static Policy nonstationary(std::vector<std::vector<ActionIndex>> table);
    static Policy constant(int n_states, ActionIndex a);

    [[nodiscard]] bool is_stationary() const noexcept { return horizon_ == 0; }
    /// 0 for stationary policies.
    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] int n_states() const noexcept { return n_states_; }

    /// For a nonstationary policy `remaining` must lie in [1, horizon].
    [[nodiscard]] ActionIndex action(StateIndex s, int remaining = 1) const;

    /// Throws ContractViolation if any action is outside [0, n_actions) or the
    /// policy does not cover `n_states` states (and `needed_horizon` steps).
    void check(int n_states, int n_actions, int needed_horizon = 0) const;

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    int n_states_ = 0;
    int horizon_ = 0;
    std::vector<ActionIndex> table_;  // row-major by (remaining - 1, state)
};

/// Marker requesting optimal control instead of evaluating a given policy.
struct OptimalControl {};
inline constexpr OptimalControl kOptimal{};

struct FiniteHorizon {
    int h = 1;
};
struct Discounted {
    double gamma = 0.9;
};

struct ValueTable {
    std::vector<double> values;
    bool discounted = false;
    int horizon = 0;     // finite tables
    double gamma = 0.0;  // discounted tables

    [[nodiscard]] double operator[](StateIndex s) const { return values[static_cast<std::size_t>(s)]; }
    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

struct Violation {
    std::string what;
    int state = -1;
    int action = -1;
    int next_state = -1;
};

struct ValidationReport {
    std::vector<Violation> violations;
    [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return violations.size(); }
};

inline constexpr double kRowSumTolerance = 1e-12;

ValidationReport validate_mdp(const TabularModel& m);

/// Exact h-step undiscounted value by backward induction.
ValueTable value_finite(const TabularModel& m, const Policy& policy, int h);
ValueTable value_finite(const TabularModel& m, OptimalControl, int h);

struct FiniteSolution {
    ValueTable values;
    Policy policy;  // nonstationary, horizon h, lowest-index ties
};
FiniteSolution solve_finite(const TabularModel& m, int h);

struct DiscountedSolution {
    ValueTable values;
    Policy policy;
    int iterations = 0;
};

/// Value iteration (or iterative policy evaluation) to a sup-norm residual of
/// tol * (1 - gamma) / (2 * gamma); the returned values are within tol of the
/// fixed point. Optimal control starts from the optimistic table
/// r_max / (1 - gamma).
DiscountedSolution value_discounted(const TabularModel& m, double gamma, OptimalControl, double tol);
DiscountedSolution value_discounted(const TabularModel& m, double gamma, const Policy& policy, double tol);

/// value_finite(...)[start] / t.
double average_return(const TabularModel& m, const Policy& policy, StateIndex start, int t);
double average_return(const TabularModel& m, OptimalControl, StateIndex start, int t);

struct Trajectory {
    std::vector<StateIndex> states;    // t + 1 entries
    std::vector<ActionIndex> actions;  // t entries
    double probability = 0.0;
};

struct TrajectoryDistribution {
    int length = 0;
    std::vector<Trajectory> paths;
};

inline constexpr std::size_t kDefaultPathCap = 10'000'000;

/// All positive-probability length-t paths from `start` under `policy`.
/// A nonstationary policy is indexed with remaining = t - step.
/// Throws ResourceLimit when the number of paths would exceed `cap`.
TrajectoryDistribution trajectory_distribution(const TabularModel& m, StateIndex start, const Policy& policy,
                                               int t, std::size_t cap = kDefaultPathCap);

/// Distribution of the state after `steps` steps, by repeated matrix application.
std::vector<double> state_distribution(const TabularModel& m, StateIndex start, const Policy& policy, int steps,
                                       int horizon_for_indexing);

}  // namespace rlao

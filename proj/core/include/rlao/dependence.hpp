#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "rlao/abstraction.hpp"
#include "rlao/mdp.hpp"

namespace rlao {

/// Stationary randomized policy over abstract states: probs[b * n_actions + a].
struct AbstractBehavior {
    int n_abstract = 0;
    int n_actions = 0;
    std::vector<double> probs;

    [[nodiscard]] double operator()(AbstractIndex b, ActionIndex a) const {
        return probs[static_cast<std::size_t>(b * n_actions + a)];
    }
    /// Always the given action.
    static AbstractBehavior constant(int n_abstract, int n_actions, ActionIndex a);
    static AbstractBehavior uniform(int n_abstract, int n_actions);
};

struct TargetPair {
    AbstractIndex state = 0;
    ActionIndex action = 0;

    friend bool operator==(const TargetPair&, const TargetPair&) = default;
};

struct DependenceReport {
    AbstractIndex u = 0;
    AbstractIndex v = 0;
    double joint = 0.0;
    double product = 0.0;
    double gap = 0.0;
    double marginal_first = 0.0;   // Pr(Y1 = u)
    double marginal_second = 0.0;  // Pr(Y2 = v)
};

/// Exact joint and marginal laws of the outcomes of the first two visits to
/// `target`, one report per (u, v). Visits are found by solving for
/// first-hit probabilities, so the horizon is unbounded. States that cannot
/// reach the target pair are treated as never visiting.
std::vector<DependenceReport> dependence_report(const TabularModel& m, const Abstraction& phi, StateIndex start,
                                                TargetPair target, const AbstractBehavior& behavior);
/// Behavior defaults to always taking the target action.
std::vector<DependenceReport> dependence_report(const TabularModel& m, const Abstraction& phi, StateIndex start,
                                                TargetPair target);

/// Pr(X_tau = x | start = s) for the first visit, as a matrix indexed
/// [s][k] where k runs over the target block's members.
std::vector<std::vector<double>> first_visit_probabilities(const TabularModel& m, const Abstraction& phi,
                                                           TargetPair target, const AbstractBehavior& behavior);

struct ResidualEntry {
    std::vector<double> history;  // Z values of earlier visits
    double probability = 0.0;     // Pr(history and one more visit)
    double residual = 0.0;        // E[Z_i | history]
    double max_abs_z = 0.0;       // largest |Z_i| with positive probability
};

/// Conditional means of Z_i = z(Y_i) - sum_j T(j | X_i, a) z(j) given every
/// reachable history of earlier Z values, for i = 1..depth. Histories whose
/// Z values agree to 1e-12 are merged.
std::vector<ResidualEntry> martingale_residuals(const TabularModel& m, const Abstraction& phi, StateIndex start,
                                                TargetPair target, std::span<const double> z, int depth,
                                                const AbstractBehavior& behavior);

/// E[Z_i | history] for one history. Throws InvalidArgument when the
/// history has probability zero.
double martingale_residual(const TabularModel& m, const Abstraction& phi, StateIndex start,
                           std::span<const double> history, TargetPair target, std::span<const double> z,
                           const AbstractBehavior& behavior);
double martingale_residual(const TabularModel& m, const Abstraction& phi, StateIndex start,
                           std::span<const double> history, TargetPair target, std::span<const double> z);

struct ExploreExploitResult {
    double lhs = 0.0;          // V^{pi,n}_M(start)
    double rhs = 0.0;          // V^{pi,n}_{M_L}(start) - n R_max Pr(A_M)
    double escape_probability = 0.0;  // Pr(A_M)
    bool holds = false;
};

/// Copy of m with every unknown pair replaced by a unit self-loop paying r_max.
TabularModel known_pair_model(const TabularModel& m, const std::vector<bool>& known);

/// `known` is indexed by ground pair s * n_actions + a.
ExploreExploitResult explore_exploit_check(const TabularModel& m, const std::vector<bool>& known,
                                           const Policy& policy, int n, StateIndex start,
                                           std::size_t cap = kDefaultPathCap);
/// `known` is indexed by abstract pair b * n_actions + a.
ExploreExploitResult explore_exploit_check(const TabularModel& m, const Abstraction& phi,
                                           const std::vector<bool>& known_abstract, const Policy& policy, int n,
                                           StateIndex start, std::size_t cap = kDefaultPathCap);

/// CSV: u,v,joint,product,gap.
void write_dependence_csv(std::ostream& out, std::span<const DependenceReport> reports);

}  // namespace rlao

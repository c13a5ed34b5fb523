#include "rlao/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rlao/errors.hpp"

namespace rlao {

TabularModel::TabularModel(int states, int actions, double rmax)
    : n_states(states), n_actions(actions), r_max(rmax) {
    if (states <= 0 || actions <= 0) {
        throw InvalidArgument("model needs at least one state and one action");
    }
    transition.assign(static_cast<std::size_t>(states) * static_cast<std::size_t>(actions) *
                          static_cast<std::size_t>(states),
                      0.0);
    reward.assign(static_cast<std::size_t>(states) * static_cast<std::size_t>(actions), 0.0);
}

void TabularModel::check_shape() const {
    if (n_states <= 0 || n_actions <= 0) {
        throw InvalidArgument("model needs at least one state and one action");
    }
    const auto sa = static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions);
    if (transition.size() != sa * static_cast<std::size_t>(n_states)) {
        throw InvalidArgument("transition tensor has " + std::to_string(transition.size()) + " entries, expected " +
                              std::to_string(sa * static_cast<std::size_t>(n_states)));
    }
    if (reward.size() != sa) {
        throw InvalidArgument("reward table has " + std::to_string(reward.size()) + " entries, expected " +
                              std::to_string(sa));
    }
}

// ---------------------------------------------------------------------------
// Policy

Policy Policy::stationary(std::vector<ActionIndex> actions) {
    Policy p;
    p.n_states_ = static_cast<int>(actions.size());
    p.horizon_ = 0;
    p.table_ = std::move(actions);
    return p;
}

Policy Policy::nonstationary(std::vector<std::vector<ActionIndex>> table) {
    if (table.empty()) {
        throw InvalidArgument("nonstationary policy needs at least one step");
    }
    Policy p;
    p.horizon_ = static_cast<int>(table.size());
    p.n_states_ = static_cast<int>(table.front().size());
    for (const auto& step : table) {
        if (static_cast<int>(step.size()) != p.n_states_) {
            throw InvalidArgument("nonstationary policy rows differ in length");
        }
        p.table_.insert(p.table_.end(), step.begin(), step.end());
    }
    return p;
}

Policy Policy::constant(int n_states, ActionIndex a) {
    return stationary(std::vector<ActionIndex>(static_cast<std::size_t>(n_states), a));
}

ActionIndex Policy::action(StateIndex s, int remaining) const {
    if (s < 0 || s >= n_states_) {
        throw InvalidArgument("policy queried for state " + std::to_string(s) + " outside [0, " +
                              std::to_string(n_states_) + ")");
    }
    if (horizon_ == 0) {
        return table_[static_cast<std::size_t>(s)];
    }
    if (remaining < 1 || remaining > horizon_) {
        throw InvalidArgument("policy queried with " + std::to_string(remaining) + " remaining steps, horizon is " +
                              std::to_string(horizon_));
    }
    return table_[static_cast<std::size_t>(remaining - 1) * static_cast<std::size_t>(n_states_) +
                  static_cast<std::size_t>(s)];
}

void Policy::check(int n_states, int n_actions, int needed_horizon) const {
    if (n_states_ != n_states) {
        throw ContractViolation("policy covers " + std::to_string(n_states_) + " states, model has " +
                                std::to_string(n_states));
    }
    if (horizon_ != 0 && horizon_ < needed_horizon) {
        throw ContractViolation("policy horizon " + std::to_string(horizon_) + " shorter than required " +
                                std::to_string(needed_horizon));
    }
    for (ActionIndex a : table_) {
        if (a < 0 || a >= n_actions) {
            throw ContractViolation("policy action " + std::to_string(a) + " outside [0, " +
                                    std::to_string(n_actions) + ")");
        }
    }
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_mdp(const TabularModel& m) {
    ValidationReport report;
    const auto sa = static_cast<std::size_t>(std::max(m.n_states, 0)) * static_cast<std::size_t>(std::max(m.n_actions, 0));
    if (m.n_states <= 0 || m.n_actions <= 0 || m.transition.size() != sa * static_cast<std::size_t>(m.n_states) ||
        m.reward.size() != sa) {
        report.violations.push_back({"shape mismatch between dimensions and tables"});
        return report;
    }
    if (!(m.r_max > 0.0)) {
        report.violations.push_back({"r_max must be positive"});
    }
    for (StateIndex s = 0; s < m.n_states; ++s) {
        for (ActionIndex a = 0; a < m.n_actions; ++a) {
            double sum = 0.0;
            auto row = m.row(s, a);
            for (StateIndex t = 0; t < m.n_states; ++t) {
                const double p = row[static_cast<std::size_t>(t)];
                if (!(p >= 0.0 && p <= 1.0)) {
                    std::ostringstream os;
                    os << "transition T(" << t << "|" << s << "," << a << ") = " << p << " outside [0,1]";
                    report.violations.push_back({os.str(), s, a, t});
                }
                sum += p;
            }
            if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) {
                std::ostringstream os;
                os.precision(17);
                os << "row (" << s << "," << a << ") sums to " << sum;
                report.violations.push_back({os.str(), s, a});
            }
            const double r = m.R(s, a);
            if (!(r >= 0.0 && r <= m.r_max)) {
                std::ostringstream os;
                os << "reward R(" << s << "," << a << ") = " << r << " outside [0, " << m.r_max << "]";
                report.violations.push_back({os.str(), s, a});
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Finite horizon

namespace {

double backup(const TabularModel& m, StateIndex s, ActionIndex a, std::span<const double> next, double gamma) {
    double v = 0.0;
    auto row = m.row(s, a);
    for (StateIndex t = 0; t < m.n_states; ++t) {
        v += row[static_cast<std::size_t>(t)] * next[static_cast<std::size_t>(t)];
    }
    return m.R(s, a) + gamma * v;
}

void require_horizon(int h) {
    if (h < 1) {
        throw InvalidArgument("horizon must be at least 1, got " + std::to_string(h));
    }
}

void require_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw InvalidArgument("discount must lie in (0,1)");
    }
}

// Greedy action for one state; ties go to the lowest action index.
std::pair<ActionIndex, double> greedy(const TabularModel& m, StateIndex s, std::span<const double> next,
                                      double gamma) {
    ActionIndex best = 0;
    double best_q = backup(m, s, 0, next, gamma);
    for (ActionIndex a = 1; a < m.n_actions; ++a) {
        const double q = backup(m, s, a, next, gamma);
        if (q > best_q) {
            best_q = q;
            best = a;
        }
    }
    return {best, best_q};
}

}  // namespace

ValueTable value_finite(const TabularModel& m, const Policy& policy, int h) {
    require_horizon(h);
    m.check_shape();
    policy.check(m.n_states, m.n_actions, h);
    std::vector<double> prev(static_cast<std::size_t>(m.n_states), 0.0);
    std::vector<double> cur(prev.size());
    for (int k = 1; k <= h; ++k) {
        for (StateIndex s = 0; s < m.n_states; ++s) {
            cur[static_cast<std::size_t>(s)] = backup(m, s, policy.action(s, k), prev, 1.0);
        }
        std::swap(prev, cur);
    }
    return ValueTable{std::move(prev), false, h, 0.0};
}

FiniteSolution solve_finite(const TabularModel& m, int h) {
    require_horizon(h);
    m.check_shape();
    std::vector<double> prev(static_cast<std::size_t>(m.n_states), 0.0);
    std::vector<double> cur(prev.size());
    std::vector<std::vector<ActionIndex>> table(static_cast<std::size_t>(h),
                                                std::vector<ActionIndex>(static_cast<std::size_t>(m.n_states)));
    for (int k = 1; k <= h; ++k) {
        for (StateIndex s = 0; s < m.n_states; ++s) {
            auto [a, q] = greedy(m, s, prev, 1.0);
            table[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(s)] = a;
            cur[static_cast<std::size_t>(s)] = q;
        }
        std::swap(prev, cur);
    }
    return FiniteSolution{ValueTable{std::move(prev), false, h, 0.0}, Policy::nonstationary(std::move(table))};
}

ValueTable value_finite(const TabularModel& m, OptimalControl, int h) { return solve_finite(m, h).values; }

double average_return(const TabularModel& m, const Policy& policy, StateIndex start, int t) {
    if (!m.valid_state(start)) {
        throw InvalidArgument("start state out of range");
    }
    return value_finite(m, policy, t)[start] / static_cast<double>(t);
}

double average_return(const TabularModel& m, OptimalControl, StateIndex start, int t) {
    if (!m.valid_state(start)) {
        throw InvalidArgument("start state out of range");
    }
    return value_finite(m, kOptimal, t)[start] / static_cast<double>(t);
}

// ---------------------------------------------------------------------------
// Discounted

namespace {

constexpr int kMaxSweeps = 10'000'000;

double stop_threshold(double gamma, double tol) { return tol * (1.0 - gamma) / (2.0 * gamma); }

}  // namespace

DiscountedSolution value_discounted(const TabularModel& m, double gamma, OptimalControl, double tol) {
    require_gamma(gamma);
    if (!(tol > 0.0)) {
        throw InvalidArgument("tolerance must be positive");
    }
    m.check_shape();
    const double threshold = stop_threshold(gamma, tol);
    std::vector<double> v(static_cast<std::size_t>(m.n_states), m.r_max / (1.0 - gamma));
    std::vector<double> next(v.size());
    int sweeps = 0;
    for (; sweeps < kMaxSweeps; ++sweeps) {
        double residual = 0.0;
        for (StateIndex s = 0; s < m.n_states; ++s) {
            const double q = greedy(m, s, v, gamma).second;
            residual = std::max(residual, std::abs(q - v[static_cast<std::size_t>(s)]));
            next[static_cast<std::size_t>(s)] = q;
        }
        std::swap(v, next);
        if (residual <= threshold) {
            ++sweeps;
            break;
        }
    }
    std::vector<ActionIndex> actions(static_cast<std::size_t>(m.n_states));
    for (StateIndex s = 0; s < m.n_states; ++s) {
        actions[static_cast<std::size_t>(s)] = greedy(m, s, v, gamma).first;
    }
    return DiscountedSolution{ValueTable{std::move(v), true, 0, gamma}, Policy::stationary(std::move(actions)), sweeps};
}

DiscountedSolution value_discounted(const TabularModel& m, double gamma, const Policy& policy, double tol) {
    require_gamma(gamma);
    if (!(tol > 0.0)) {
        throw InvalidArgument("tolerance must be positive");
    }
    m.check_shape();
    if (!policy.is_stationary()) {
        throw ContractViolation("discounted evaluation needs a stationary policy");
    }
    policy.check(m.n_states, m.n_actions);
    const double threshold = stop_threshold(gamma, tol);
    std::vector<double> v(static_cast<std::size_t>(m.n_states), 0.0);
    std::vector<double> next(v.size());
    int sweeps = 0;
    for (; sweeps < kMaxSweeps; ++sweeps) {
        double residual = 0.0;
        for (StateIndex s = 0; s < m.n_states; ++s) {
            const double q = backup(m, s, policy.action(s), v, gamma);
            residual = std::max(residual, std::abs(q - v[static_cast<std::size_t>(s)]));
            next[static_cast<std::size_t>(s)] = q;
        }
        std::swap(v, next);
        if (residual <= threshold) {
            ++sweeps;
            break;
        }
    }
    return DiscountedSolution{ValueTable{std::move(v), true, 0, gamma}, policy, sweeps};
}

// ---------------------------------------------------------------------------
// Enumeration

TrajectoryDistribution trajectory_distribution(const TabularModel& m, StateIndex start, const Policy& policy, int t,
                                               std::size_t cap) {
    require_horizon(t);
    m.check_shape();
    if (!m.valid_state(start)) {
        throw InvalidArgument("start state out of range");
    }
    policy.check(m.n_states, m.n_actions, t);

    TrajectoryDistribution out;
    out.length = t;
    Trajectory cur;
    cur.states.reserve(static_cast<std::size_t>(t) + 1);
    cur.actions.reserve(static_cast<std::size_t>(t));
    cur.states.push_back(start);

    auto expand = [&](auto&& self, double prob) -> void {
        const int step = static_cast<int>(cur.actions.size());
        if (step == t) {
            if (out.paths.size() >= cap) {
                throw ResourceLimit("trajectory enumeration exceeds the path cap of " + std::to_string(cap));
            }
            Trajectory done = cur;
            done.probability = prob;
            out.paths.push_back(std::move(done));
            return;
        }
        const StateIndex s = cur.states.back();
        const ActionIndex a = policy.action(s, t - step);
        cur.actions.push_back(a);
        auto row = m.row(s, a);
        for (StateIndex next = 0; next < m.n_states; ++next) {
            const double p = row[static_cast<std::size_t>(next)];
            if (p <= 0.0) {
                continue;
            }
            cur.states.push_back(next);
            self(self, prob * p);
            cur.states.pop_back();
        }
        cur.actions.pop_back();
    };
    expand(expand, 1.0);
    return out;
}

std::vector<double> state_distribution(const TabularModel& m, StateIndex start, const Policy& policy, int steps,
                                       int horizon_for_indexing) {
    m.check_shape();
    std::vector<double> dist(static_cast<std::size_t>(m.n_states), 0.0);
    dist[static_cast<std::size_t>(start)] = 1.0;
    std::vector<double> next(dist.size());
    for (int k = 0; k < steps; ++k) {
        std::fill(next.begin(), next.end(), 0.0);
        for (StateIndex s = 0; s < m.n_states; ++s) {
            const double w = dist[static_cast<std::size_t>(s)];
            if (w == 0.0) {
                continue;
            }
            auto row = m.row(s, policy.action(s, horizon_for_indexing - k));
            for (StateIndex t = 0; t < m.n_states; ++t) {
                next[static_cast<std::size_t>(t)] += w * row[static_cast<std::size_t>(t)];
            }
        }
        std::swap(dist, next);
    }
    return dist;
}

}  // namespace rlao

#include "rlao/dependence.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include "rlao/bounds.hpp"
#include "rlao/errors.hpp"

namespace rlao {

AbstractBehavior AbstractBehavior::constant(int n_abstract, int n_actions, ActionIndex a) {
    if (a < 0 || a >= n_actions) {
        throw InvalidArgument("behavior action out of range");
    }
    AbstractBehavior out{n_abstract, n_actions,
                         std::vector<double>(static_cast<std::size_t>(n_abstract * n_actions), 0.0)};
    for (int b = 0; b < n_abstract; ++b) out.probs[static_cast<std::size_t>(b * n_actions + a)] = 1.0;
    return out;
}

AbstractBehavior AbstractBehavior::uniform(int n_abstract, int n_actions) {
    return {n_abstract, n_actions,
            std::vector<double>(static_cast<std::size_t>(n_abstract * n_actions), 1.0 / n_actions)};
}

namespace {

void check_inputs(const TabularModel& m, const Abstraction& phi, TargetPair target, const AbstractBehavior& beh) {
    if (phi.n_states() != m.n_states) {
        throw InvalidArgument("abstraction does not match the model");
    }
    if (target.state < 0 || target.state >= phi.n_abstract() || !m.valid_action(target.action)) {
        throw InvalidArgument("target pair out of range");
    }
    if (beh.n_abstract != phi.n_abstract() || beh.n_actions != m.n_actions ||
        beh.probs.size() != static_cast<std::size_t>(beh.n_abstract * beh.n_actions)) {
        throw InvalidArgument("behavior does not match the abstraction");
    }
    for (int b = 0; b < beh.n_abstract; ++b) {
        double sum = 0.0;
        for (int a = 0; a < beh.n_actions; ++a) {
            const double p = beh(b, a);
            if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("behavior probability outside [0, 1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            throw InvalidArgument("behavior row " + std::to_string(b) + " does not sum to 1");
        }
    }
}

// Transition kernel of one step that is not a visit, and the probability
// that a step from s is a visit.
struct VisitKernel {
    Eigen::MatrixXd q;
    Eigen::VectorXd visit;
};

VisitKernel visit_kernel(const TabularModel& m, const Abstraction& phi, TargetPair target,
                         const AbstractBehavior& beh) {
    const int n = m.n_states;
    VisitKernel k{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
    for (StateIndex s = 0; s < n; ++s) {
        const AbstractIndex b = phi(s);
        for (ActionIndex a = 0; a < m.n_actions; ++a) {
            const double p = beh(b, a);
            if (p == 0.0) continue;
            if (b == target.state && a == target.action) {
                k.visit(s) = p;
                continue;
            }
            const auto row = m.row(s, a);
            for (StateIndex t = 0; t < n; ++t) k.q(s, t) += p * row[static_cast<std::size_t>(t)];
        }
    }
    return k;
}

}  // namespace

std::vector<std::vector<double>> first_visit_probabilities(const TabularModel& m, const Abstraction& phi,
                                                           TargetPair target, const AbstractBehavior& behavior) {
    check_inputs(m, phi, target, behavior);
    const int n = m.n_states;
    const auto& members = phi.block(target.state);
    const auto k = visit_kernel(m, phi, target, behavior);

    // States with a positive-probability route to a visit.
    std::vector<bool> live(static_cast<std::size_t>(n), false);
    std::deque<StateIndex> frontier;
    for (StateIndex s = 0; s < n; ++s) {
        if (k.visit(s) > 0.0) {
            live[static_cast<std::size_t>(s)] = true;
            frontier.push_back(s);
        }
    }
    while (!frontier.empty()) {
        const StateIndex t = frontier.front();
        frontier.pop_front();
        for (StateIndex s = 0; s < n; ++s) {
            if (!live[static_cast<std::size_t>(s)] && k.q(s, t) > 0.0) {
                live[static_cast<std::size_t>(s)] = true;
                frontier.push_back(s);
            }
        }
    }
    std::vector<int> pos(static_cast<std::size_t>(n), -1);
    std::vector<StateIndex> idx;
    for (StateIndex s = 0; s < n; ++s) {
        if (live[static_cast<std::size_t>(s)]) {
            pos[static_cast<std::size_t>(s)] = static_cast<int>(idx.size());
            idx.push_back(s);
        }
    }

    std::vector<std::vector<double>> h(static_cast<std::size_t>(n), std::vector<double>(members.size(), 0.0));
    const auto r = static_cast<Eigen::Index>(idx.size());
    if (r == 0) return h;

    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(r, r);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(r, static_cast<Eigen::Index>(members.size()));
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < r; ++j) a(i, j) -= k.q(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    for (std::size_t c = 0; c < members.size(); ++c) {
        const int p = pos[static_cast<std::size_t>(members[c])];
        if (p >= 0) rhs(p, static_cast<Eigen::Index>(c)) = k.visit(members[c]);
    }
    const Eigen::MatrixXd sol = a.partialPivLu().solve(rhs);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (std::size_t c = 0; c < members.size(); ++c) {
            h[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])][c] =
                std::max(0.0, sol(i, static_cast<Eigen::Index>(c)));
        }
    }
    return h;
}

std::vector<DependenceReport> dependence_report(const TabularModel& m, const Abstraction& phi, StateIndex start,
                                                TargetPair target, const AbstractBehavior& behavior) {
    if (!m.valid_state(start)) {
        throw InvalidArgument("start state out of range");
    }
    const auto h = first_visit_probabilities(m, phi, target, behavior);
    const auto& members = phi.block(target.state);
    const auto nb = static_cast<std::size_t>(phi.n_abstract());
    const int n = m.n_states;

    // Ground state right after the first visit.
    std::vector<double> after(static_cast<std::size_t>(n), 0.0);
    for (std::size_t c = 0; c < members.size(); ++c) {
        const double p = h[static_cast<std::size_t>(start)][c];
        if (p == 0.0) continue;
        const auto row = m.row(members[c], target.action);
        for (StateIndex t = 0; t < n; ++t) after[static_cast<std::size_t>(t)] += p * row[static_cast<std::size_t>(t)];
    }
    std::vector<std::vector<double>> lifted;
    for (StateIndex x : members) lifted.push_back(lift_transition(m, phi, x, target.action));

    std::vector<double> joint(nb * nb, 0.0);
    std::vector<double> first(nb, 0.0);
    for (StateIndex t = 0; t < n; ++t) {
        const double w = after[static_cast<std::size_t>(t)];
        if (w == 0.0) continue;
        const auto u = static_cast<std::size_t>(phi(t));
        first[u] += w;
        for (std::size_t c = 0; c < members.size(); ++c) {
            const double p = w * h[static_cast<std::size_t>(t)][c];
            if (p == 0.0) continue;
            for (std::size_t v = 0; v < nb; ++v) joint[u * nb + v] += p * lifted[c][v];
        }
    }
    std::vector<double> second(nb, 0.0);
    for (std::size_t u = 0; u < nb; ++u) {
        for (std::size_t v = 0; v < nb; ++v) second[v] += joint[u * nb + v];
    }

    std::vector<DependenceReport> out;
    out.reserve(nb * nb);
    for (std::size_t u = 0; u < nb; ++u) {
        for (std::size_t v = 0; v < nb; ++v) {
            DependenceReport r;
            r.u = static_cast<AbstractIndex>(u);
            r.v = static_cast<AbstractIndex>(v);
            r.joint = joint[u * nb + v];
            r.marginal_first = first[u];
            r.marginal_second = second[v];
            r.product = first[u] * second[v];
            r.gap = r.joint - r.product;
            out.push_back(r);
        }
    }
    return out;
}

std::vector<DependenceReport> dependence_report(const TabularModel& m, const Abstraction& phi, StateIndex start,
                                                TargetPair target) {
    return dependence_report(m, phi, start, target,
                             AbstractBehavior::constant(phi.n_abstract(), m.n_actions, target.action));
}

// ---------------------------------------------------------------------------
// Martingale residuals

namespace {

constexpr double kHistoryTolerance = 1e-12;

bool same_history(const std::vector<double>& a, std::span<const double> b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > kHistoryTolerance) return false;
    }
    return true;
}

struct Branch {
    std::vector<double> history;
    std::vector<double> mass;  // unnormalized law of the current ground state
};

}  // namespace

std::vector<ResidualEntry> martingale_residuals(const TabularModel& m, const Abstraction& phi, StateIndex start,
                                                TargetPair target, std::span<const double> z, int depth,
                                                const AbstractBehavior& behavior) {
    if (!m.valid_state(start)) {
        throw InvalidArgument("start state out of range");
    }
    if (z.size() != static_cast<std::size_t>(phi.n_abstract())) {
        throw InvalidArgument("z needs one entry per abstract state");
    }
    if (depth < 1) {
        throw InvalidArgument("depth must be at least 1");
    }
    const auto h = first_visit_probabilities(m, phi, target, behavior);
    const auto& members = phi.block(target.state);
    const int n = m.n_states;

    // Z(x, t) for member x and next ground state t.
    std::vector<double> mean_z(members.size(), 0.0);
    for (std::size_t c = 0; c < members.size(); ++c) {
        const auto lifted = lift_transition(m, phi, members[c], target.action);
        for (std::size_t j = 0; j < lifted.size(); ++j) mean_z[c] += lifted[j] * z[j];
    }

    std::vector<ResidualEntry> out;
    std::vector<Branch> level;
    level.push_back({{}, std::vector<double>(static_cast<std::size_t>(n), 0.0)});
    level.front().mass[static_cast<std::size_t>(start)] = 1.0;

    for (int i = 1; i <= depth; ++i) {
        std::vector<Branch> next;
        for (const auto& br : level) {
            std::vector<double> at(members.size(), 0.0);
            double total = 0.0;
            for (StateIndex s = 0; s < n; ++s) {
                const double w = br.mass[static_cast<std::size_t>(s)];
                if (w == 0.0) continue;
                for (std::size_t c = 0; c < members.size(); ++c) at[c] += w * h[static_cast<std::size_t>(s)][c];
            }
            for (double p : at) total += p;
            if (total <= 0.0) continue;

            ResidualEntry entry{br.history, total, 0.0, 0.0};
            double acc = 0.0;
            for (std::size_t c = 0; c < members.size(); ++c) {
                if (at[c] == 0.0) continue;
                const auto row = m.row(members[c], target.action);
                for (StateIndex t = 0; t < n; ++t) {
                    const double p = at[c] * row[static_cast<std::size_t>(t)];
                    if (p == 0.0) continue;
                    const double zi = z[static_cast<std::size_t>(phi(t))] - mean_z[c];
                    acc += p * zi;
                    entry.max_abs_z = std::max(entry.max_abs_z, std::abs(zi));
                    if (i == depth) continue;
                    auto hist = br.history;
                    hist.push_back(zi);
                    auto it = std::find_if(next.begin(), next.end(),
                                           [&](const Branch& b) { return same_history(b.history, hist); });
                    if (it == next.end()) {
                        next.push_back({std::move(hist), std::vector<double>(static_cast<std::size_t>(n), 0.0)});
                        it = std::prev(next.end());
                    }
                    it->mass[static_cast<std::size_t>(t)] += p;
                }
            }
            entry.residual = acc / total;
            out.push_back(std::move(entry));
        }
        level = std::move(next);
    }
    return out;
}

double martingale_residual(const TabularModel& m, const Abstraction& phi, StateIndex start,
                           std::span<const double> history, TargetPair target, std::span<const double> z,
                           const AbstractBehavior& behavior) {
    const int depth = static_cast<int>(history.size()) + 1;
    for (const auto& e : martingale_residuals(m, phi, start, target, z, depth, behavior)) {
        if (same_history(e.history, history)) return e.residual;
    }
    throw InvalidArgument("history has probability zero");
}

double martingale_residual(const TabularModel& m, const Abstraction& phi, StateIndex start,
                           std::span<const double> history, TargetPair target, std::span<const double> z) {
    return martingale_residual(m, phi, start, history, target, z,
                               AbstractBehavior::constant(phi.n_abstract(), m.n_actions, target.action));
}

// ---------------------------------------------------------------------------
// Implicit explore or exploit

TabularModel known_pair_model(const TabularModel& m, const std::vector<bool>& known) {
    if (known.size() != static_cast<std::size_t>(m.n_states * m.n_actions)) {
        throw InvalidArgument("known set needs one flag per state-action pair");
    }
    TabularModel out = m;
    for (StateIndex s = 0; s < m.n_states; ++s) {
        for (ActionIndex a = 0; a < m.n_actions; ++a) {
            if (known[static_cast<std::size_t>(s * m.n_actions + a)]) continue;
            auto row = out.row(s, a);
            std::fill(row.begin(), row.end(), 0.0);
            row[static_cast<std::size_t>(s)] = 1.0;
            out.R(s, a) = m.r_max;
        }
    }
    return out;
}

ExploreExploitResult explore_exploit_check(const TabularModel& m, const std::vector<bool>& known,
                                           const Policy& policy, int n, StateIndex start, std::size_t cap) {
    const auto ml = known_pair_model(m, known);
    ExploreExploitResult r;
    r.lhs = value_finite(m, policy, n)[start];
    const double v_ml = value_finite(ml, policy, n)[start];
    const auto dist = trajectory_distribution(m, start, policy, n, cap);
    for (const auto& path : dist.paths) {
        for (std::size_t t = 0; t < path.actions.size(); ++t) {
            const auto pair = static_cast<std::size_t>(path.states[t] * m.n_actions + path.actions[t]);
            if (!known[pair]) {
                r.escape_probability += path.probability;
                break;
            }
        }
    }
    r.rhs = v_ml - static_cast<double>(n) * m.r_max * r.escape_probability;
    r.holds = r.lhs >= r.rhs - 1e-10;
    return r;
}

ExploreExploitResult explore_exploit_check(const TabularModel& m, const Abstraction& phi,
                                           const std::vector<bool>& known_abstract, const Policy& policy, int n,
                                           StateIndex start, std::size_t cap) {
    if (known_abstract.size() != static_cast<std::size_t>(phi.n_abstract() * m.n_actions)) {
        throw InvalidArgument("known set needs one flag per abstract pair");
    }
    std::vector<bool> known(static_cast<std::size_t>(m.n_states * m.n_actions));
    for (StateIndex s = 0; s < m.n_states; ++s) {
        for (ActionIndex a = 0; a < m.n_actions; ++a) {
            known[static_cast<std::size_t>(s * m.n_actions + a)] =
                known_abstract[static_cast<std::size_t>(phi(s) * m.n_actions + a)];
        }
    }
    return explore_exploit_check(m, known, policy, n, start, cap);
}

void write_dependence_csv(std::ostream& out, std::span<const DependenceReport> reports) {
    out << "u,v,joint,product,gap\n";
    for (const auto& r : reports) {
        out << r.u << ',' << r.v << ',' << format_double(r.joint) << ',' << format_double(r.product) << ','
            << format_double(r.gap) << '\n';
    }
}

}  // namespace rlao

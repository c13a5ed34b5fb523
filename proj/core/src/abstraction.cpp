#include "rlao/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlao/errors.hpp"

namespace rlao {

Abstraction::Abstraction(std::vector<AbstractIndex> map, int n_abstract)
    : map_(std::move(map)), n_abstract_(n_abstract) {
    if (map_.empty()) {
        throw InvalidArgument("abstraction needs at least one ground state");
    }
    if (n_abstract_ <= 0) {
        throw InvalidArgument("abstraction needs at least one abstract state");
    }
    blocks_.assign(static_cast<std::size_t>(n_abstract_), {});
    for (std::size_t s = 0; s < map_.size(); ++s) {
        const AbstractIndex b = map_[s];
        if (b < 0 || b >= n_abstract_) {
            throw InvalidArgument("ground state " + std::to_string(s) + " maps to " + std::to_string(b) +
                                  ", outside [0, " + std::to_string(n_abstract_) + ")");
        }
        blocks_[static_cast<std::size_t>(b)].push_back(static_cast<StateIndex>(s));
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (blocks_[b].empty()) {
            throw InvalidArgument("abstract state " + std::to_string(b) + " has no ground members");
        }
    }
}

Abstraction Abstraction::from_map(std::vector<AbstractIndex> map) {
    if (map.empty()) {
        throw InvalidArgument("abstraction needs at least one ground state");
    }
    const int n = *std::max_element(map.begin(), map.end()) + 1;
    return {std::move(map), n};
}

Abstraction Abstraction::identity(int n_states) {
    if (n_states <= 0) {
        throw InvalidArgument("abstraction needs at least one ground state");
    }
    std::vector<AbstractIndex> map(static_cast<std::size_t>(n_states));
    for (int s = 0; s < n_states; ++s) {
        map[static_cast<std::size_t>(s)] = s;
    }
    return {std::move(map), n_states};
}

Abstraction Abstraction::single_block(int n_states) {
    if (n_states <= 0) {
        throw InvalidArgument("abstraction needs at least one ground state");
    }
    return {std::vector<AbstractIndex>(static_cast<std::size_t>(n_states), 0), 1};
}

Abstraction Abstraction::canonical(std::span<const AbstractIndex> map) {
    std::vector<AbstractIndex> relabel;
    std::vector<AbstractIndex> out;
    out.reserve(map.size());
    for (AbstractIndex b : map) {
        if (b < 0) {
            throw InvalidArgument("negative abstract label " + std::to_string(b));
        }
        if (static_cast<std::size_t>(b) >= relabel.size()) {
            relabel.resize(static_cast<std::size_t>(b) + 1, -1);
        }
        auto& label = relabel[static_cast<std::size_t>(b)];
        if (label < 0) {
            label = static_cast<AbstractIndex>(std::count_if(relabel.begin(), relabel.end(),
                                                             [](AbstractIndex x) { return x >= 0; }));
        }
        out.push_back(label);
    }
    return from_map(std::move(out));
}

// ---------------------------------------------------------------------------
// WeightingFn

WeightingFn::WeightingFn(int n_states, int n_actions, std::vector<double> weights)
    : n_states_(n_states), n_actions_(n_actions), weights_(std::move(weights)) {
    if (n_states <= 0 || n_actions <= 0) {
        throw InvalidArgument("weighting needs at least one state and one action");
    }
    if (weights_.size() != static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions)) {
        throw InvalidArgument("weighting has " + std::to_string(weights_.size()) + " entries, expected " +
                              std::to_string(n_states * n_actions));
    }
}

WeightingFn WeightingFn::uniform(const Abstraction& phi, int n_actions) {
    std::vector<double> w(static_cast<std::size_t>(phi.n_states()) * static_cast<std::size_t>(n_actions));
    for (StateIndex s = 0; s < phi.n_states(); ++s) {
        const double share = 1.0 / static_cast<double>(phi.block(phi(s)).size());
        for (ActionIndex a = 0; a < n_actions; ++a) {
            w[static_cast<std::size_t>(s * n_actions + a)] = share;
        }
    }
    return {phi.n_states(), n_actions, std::move(w)};
}

WeightingFn WeightingFn::indicator(const Abstraction& phi, int n_actions, std::span<const StateIndex> prototype) {
    if (prototype.size() != static_cast<std::size_t>(phi.n_abstract()) * static_cast<std::size_t>(n_actions)) {
        throw InvalidArgument("indicator weighting needs one prototype per abstract pair");
    }
    std::vector<double> w(static_cast<std::size_t>(phi.n_states()) * static_cast<std::size_t>(n_actions), 0.0);
    for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
        for (ActionIndex a = 0; a < n_actions; ++a) {
            const StateIndex x = prototype[static_cast<std::size_t>(b * n_actions + a)];
            if (x < 0 || x >= phi.n_states() || phi(x) != b) {
                throw InvalidArgument("prototype " + std::to_string(x) + " is not a member of abstract state " +
                                      std::to_string(b));
            }
            w[static_cast<std::size_t>(x * n_actions + a)] = 1.0;
        }
    }
    return {phi.n_states(), n_actions, std::move(w)};
}

double WeightingFn::operator()(StateIndex s, ActionIndex a) const {
    if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_) {
        throw InvalidArgument("weighting queried at (" + std::to_string(s) + ", " + std::to_string(a) + ")");
    }
    return raw(s, a);
}

double WeightingFn::at(const Abstraction& phi, StateIndex s, ActionIndex a) const {
    const double w = (*this)(s, a);
    if (!in_domain(phi, s, a)) {
        throw DomainError("weighting undefined for abstract pair (" + std::to_string(phi(s)) + ", " +
                          std::to_string(a) + ")");
    }
    return w;
}

void WeightingFn::restrict_domain(std::vector<bool> defined, int n_abstract) {
    if (defined.size() != static_cast<std::size_t>(n_abstract) * static_cast<std::size_t>(n_actions_)) {
        throw InvalidArgument("domain mask has the wrong size");
    }
    domain_ = std::move(defined);
    domain_blocks_ = n_abstract;
}

bool WeightingFn::pair_in_domain(AbstractIndex b, ActionIndex a) const {
    if (domain_.empty()) {
        return true;
    }
    if (b < 0 || b >= domain_blocks_ || a < 0 || a >= n_actions_) {
        return false;
    }
    return domain_[static_cast<std::size_t>(b * n_actions_ + a)];
}

bool WeightingFn::in_domain(const Abstraction& phi, StateIndex s, ActionIndex a) const {
    return pair_in_domain(phi(s), a);
}

// ---------------------------------------------------------------------------

AbstractModel optimistic_model(int n_abstract, int n_actions, double r_max) {
    AbstractModel m(n_abstract, n_actions, r_max);
    for (StateIndex b = 0; b < n_abstract; ++b) {
        for (ActionIndex a = 0; a < n_actions; ++a) {
            m.row(b, a)[static_cast<std::size_t>(b)] = 1.0;
            m.R(b, a) = r_max;
        }
    }
    return m;
}

namespace {

void require_compatible(const TabularModel& m, const Abstraction& phi) {
    if (m.n_states != phi.n_states()) {
        throw InvalidArgument("abstraction covers " + std::to_string(phi.n_states()) + " states, model has " +
                              std::to_string(m.n_states));
    }
}

}  // namespace

std::vector<double> lift_transition(const TabularModel& m, const Abstraction& phi, StateIndex s, ActionIndex a) {
    require_compatible(m, phi);
    if (!m.valid_state(s) || !m.valid_action(a)) {
        throw InvalidArgument("lift_transition at invalid pair (" + std::to_string(s) + ", " + std::to_string(a) +
                              ")");
    }
    std::vector<double> out(static_cast<std::size_t>(phi.n_abstract()), 0.0);
    const auto row = m.row(s, a);
    for (StateIndex next = 0; next < m.n_states; ++next) {
        out[static_cast<std::size_t>(phi(next))] += row[static_cast<std::size_t>(next)];
    }
    return out;
}

std::vector<double> weighted_row(const TabularModel& m, const Abstraction& phi, const WeightingFn& w,
                                 AbstractIndex b, ActionIndex a) {
    std::vector<double> out(static_cast<std::size_t>(phi.n_abstract()), 0.0);
    for (StateIndex s : phi.block(b)) {
        const double ws = w.at(phi, s, a);
        if (ws == 0.0) {
            continue;
        }
        const auto lifted = lift_transition(m, phi, s, a);
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] += ws * lifted[j];
        }
    }
    return out;
}

ValidationReport validate_weighting(const WeightingFn& w, const Abstraction& phi) {
    ValidationReport report;
    if (w.n_states() != phi.n_states()) {
        report.violations.push_back({"weighting covers " + std::to_string(w.n_states()) +
                                     " states, abstraction has " + std::to_string(phi.n_states())});
        return report;
    }
    for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
        for (ActionIndex a = 0; a < w.n_actions(); ++a) {
            if (!w.pair_in_domain(b, a)) {
                continue;
            }
            double sum = 0.0;
            for (StateIndex s : phi.block(b)) {
                const double ws = w.raw(s, a);
                if (!(ws >= 0.0 && ws <= 1.0)) {
                    report.violations.push_back(
                        {"weight " + std::to_string(ws) + " outside [0, 1] in abstract state " + std::to_string(b) +
                             " action " + std::to_string(a),
                         b, a, s});
                }
                sum += ws;
            }
            if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) {
                report.violations.push_back({"weights of abstract state " + std::to_string(b) + " action " +
                                                 std::to_string(a) + " sum to " + std::to_string(sum),
                                             b, a});
            }
        }
    }
    return report;
}

AbstractModel build_abstract_mdp(const TabularModel& m, const Abstraction& phi, const WeightingFn& w) {
    require_compatible(m, phi);
    if (w.n_actions() != m.n_actions) {
        throw InvalidArgument("weighting has " + std::to_string(w.n_actions()) + " actions, model has " +
                              std::to_string(m.n_actions));
    }
    const auto report = validate_weighting(w, phi);
    if (!report.ok()) {
        const auto& v = report.violations.front();
        throw ContractViolation("invalid weighting at abstract pair (" + std::to_string(v.state) + ", " +
                                std::to_string(v.action) + "): " + v.what);
    }
    AbstractModel out(phi.n_abstract(), m.n_actions, m.r_max);
    for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
        for (ActionIndex a = 0; a < m.n_actions; ++a) {
            auto dst = out.row(b, a);
            if (!w.pair_in_domain(b, a)) {
                // Outside the weighting's domain: unit self-loop, zero reward.
                dst[static_cast<std::size_t>(b)] = 1.0;
                continue;
            }
            double r = 0.0;
            for (StateIndex s : phi.block(b)) {
                r += w.raw(s, a) * m.R(s, a);
            }
            out.R(b, a) = r;
            const auto row = weighted_row(m, phi, w, b, a);
            std::copy(row.begin(), row.end(), dst.begin());
        }
    }
    return out;
}

SimilarityErrors measure_similarity(const TabularModel& m, const Abstraction& phi) {
    require_compatible(m, phi);
    SimilarityErrors e;
    const auto nb = static_cast<std::size_t>(phi.n_abstract());
    for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
        const auto& members = phi.block(b);
        if (members.size() < 2) {
            continue;
        }
        for (ActionIndex a = 0; a < m.n_actions; ++a) {
            double rlo = m.R(members.front(), a);
            double rhi = rlo;
            std::vector<double> lo = lift_transition(m, phi, members.front(), a);
            std::vector<double> hi = lo;
            for (std::size_t i = 1; i < members.size(); ++i) {
                const double r = m.R(members[i], a);
                rlo = std::min(rlo, r);
                rhi = std::max(rhi, r);
                const auto lifted = lift_transition(m, phi, members[i], a);
                for (std::size_t j = 0; j < nb; ++j) {
                    lo[j] = std::min(lo[j], lifted[j]);
                    hi[j] = std::max(hi[j], lifted[j]);
                }
            }
            e.eta_r = std::max(e.eta_r, rhi - rlo);
            for (std::size_t j = 0; j < nb; ++j) {
                e.eta_t = std::max(e.eta_t, hi[j] - lo[j]);
            }
        }
    }
    return e;
}

SimilarityErrors premise_errors(const TabularModel& m, const Abstraction& phi, const TabularModel& abstract) {
    require_compatible(m, phi);
    if (abstract.n_states != phi.n_abstract() || abstract.n_actions != m.n_actions) {
        throw InvalidArgument("abstract model does not match the abstraction");
    }
    SimilarityErrors e;
    for (StateIndex s = 0; s < m.n_states; ++s) {
        const AbstractIndex b = phi(s);
        for (ActionIndex a = 0; a < m.n_actions; ++a) {
            e.eta_r = std::max(e.eta_r, std::abs(abstract.R(b, a) - m.R(s, a)));
            const auto lifted = lift_transition(m, phi, s, a);
            const auto row = abstract.row(b, a);
            for (std::size_t j = 0; j < lifted.size(); ++j) {
                e.eta_t = std::max(e.eta_t, std::abs(row[j] - lifted[j]));
            }
        }
    }
    return e;
}

SimilarityErrors model_distance(const TabularModel& a, const TabularModel& b) {
    if (a.n_states != b.n_states || a.n_actions != b.n_actions) {
        throw InvalidArgument("models live on different spaces");
    }
    SimilarityErrors e;
    for (std::size_t i = 0; i < a.reward.size(); ++i) {
        e.eta_r = std::max(e.eta_r, std::abs(a.reward[i] - b.reward[i]));
    }
    for (std::size_t i = 0; i < a.transition.size(); ++i) {
        e.eta_t = std::max(e.eta_t, std::abs(a.transition[i] - b.transition[i]));
    }
    return e;
}

double l1_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw InvalidArgument("l1_distance on vectors of different length");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        d += std::abs(p[i] - q[i]);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Benchmark generator

std::vector<double> perturb_row(std::span<const double> row, double cap, CounterRng& rng) {
    std::vector<double> out(row.begin(), row.end());
    if (cap <= 0.0 || out.size() < 2) {
        return out;
    }
    const std::size_t n = out.size();
    std::vector<double> d(n), lo(n), hi(n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        lo[j] = std::max(-cap, -out[j]);
        hi[j] = std::min(cap, 1.0 - out[j]);
        d[j] = std::clamp(-cap + 2.0 * cap * rng.uniform(), lo[j], hi[j]);
        sum += d[j];
    }
    // Move every offset toward the bound on the side that cancels the excess,
    // in proportion to its room; each offset stays inside [lo, hi].
    if (sum > 0.0) {
        double room = 0.0;
        for (std::size_t j = 0; j < n; ++j) room += d[j] - lo[j];
        if (room > 0.0) {
            for (std::size_t j = 0; j < n; ++j) d[j] -= sum * (d[j] - lo[j]) / room;
        }
    } else if (sum < 0.0) {
        double room = 0.0;
        for (std::size_t j = 0; j < n; ++j) room += hi[j] - d[j];
        if (room > 0.0) {
            for (std::size_t j = 0; j < n; ++j) d[j] -= sum * (hi[j] - d[j]) / room;
        }
    }
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = std::clamp(out[j] + d[j], 0.0, 1.0);
        total += out[j];
    }
    for (auto& x : out) x /= total;
    return out;
}

namespace {

std::vector<double> random_simplex(std::size_t n, CounterRng& rng) {
    std::vector<double> p(n);
    double total = 0.0;
    for (auto& x : p) {
        x = rng.uniform() + 1e-3;
        total += x;
    }
    for (auto& x : p) x /= total;
    return p;
}

}  // namespace

std::pair<GroundMDP, Abstraction> generate_benchmark(const BenchmarkSpec& spec) {
    if (spec.n_abstract <= 0 || spec.n_actions <= 0) {
        throw InvalidArgument("benchmark needs at least one abstract state and one action");
    }
    if (static_cast<int>(spec.block_sizes.size()) != spec.n_abstract) {
        throw InvalidArgument("benchmark needs one block size per abstract state");
    }
    if (std::any_of(spec.block_sizes.begin(), spec.block_sizes.end(), [](int k) { return k <= 0; })) {
        throw InvalidArgument("benchmark block sizes must be positive");
    }
    if (!(spec.r_max > 0.0)) {
        throw InvalidArgument("benchmark r_max must be positive");
    }
    if (!(spec.target_eta_t >= 0.0 && spec.target_eta_t <= 2.0)) {
        throw InvalidArgument("target eta_T must lie in [0, 2]");
    }
    if (!(spec.target_eta_r >= 0.0 && spec.target_eta_r <= spec.r_max)) {
        throw InvalidArgument("target eta_R must lie in [0, r_max]");
    }

    std::vector<AbstractIndex> map;
    for (int b = 0; b < spec.n_abstract; ++b) {
        map.insert(map.end(), static_cast<std::size_t>(spec.block_sizes[static_cast<std::size_t>(b)]), b);
    }
    Abstraction phi(std::move(map), spec.n_abstract);
    const int n = phi.n_states();
    const int na = spec.n_actions;
    const auto nb = static_cast<std::size_t>(spec.n_abstract);

    const CounterRng root(spec.seed);
    GroundMDP m(n, na, spec.r_max);
    m.start_state = 0;

    const double cap_t = 0.5 * spec.target_eta_t * (1.0 - 1e-9);
    const double half_r = 0.5 * spec.target_eta_r;
    for (AbstractIndex b = 0; b < spec.n_abstract; ++b) {
        for (ActionIndex a = 0; a < na; ++a) {
            const auto ub = static_cast<std::uint64_t>(b);
            const auto ua = static_cast<std::uint64_t>(a);
            CounterRng proto_rng = root.split({1, ub, ua});
            const auto prototype = random_simplex(nb, proto_rng);
            const double reward = spec.r_max * proto_rng.uniform();
            std::vector<std::vector<double>> split(nb);
            for (std::size_t t = 0; t < nb; ++t) {
                split[t] = random_simplex(phi.block(static_cast<AbstractIndex>(t)).size(), proto_rng);
            }
            for (StateIndex s : phi.block(b)) {
                CounterRng srng = root.split({2, static_cast<std::uint64_t>(s), ua});
                const auto lifted = perturb_row(prototype, cap_t, srng);
                auto dst = m.row(s, a);
                for (std::size_t t = 0; t < nb; ++t) {
                    const auto& members = phi.block(static_cast<AbstractIndex>(t));
                    for (std::size_t j = 0; j < members.size(); ++j) {
                        dst[static_cast<std::size_t>(members[j])] = lifted[t] * split[t][j];
                    }
                }
                double r = reward;
                if (half_r > 0.0) {
                    r += -half_r + 2.0 * half_r * srng.uniform();
                }
                m.R(s, a) = std::clamp(r, 0.0, spec.r_max);
            }
        }
    }
    return {std::move(m), std::move(phi)};
}

}  // namespace rlao

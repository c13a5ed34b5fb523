#include "rlao/sampling.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

#include "rlao/bounds.hpp"
#include "rlao/errors.hpp"

namespace rlao {

StateIndex sample_index(std::span<const double> row, double u) {
    double acc = 0.0;
    StateIndex last = -1;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] <= 0.0) continue;
        acc += row[j];
        last = static_cast<StateIndex>(j);
        if (u < acc) return last;
    }
    // u landed in the rounding gap above the accumulated mass.
    if (last < 0) {
        throw ContractViolation("cannot sample from a row without positive mass");
    }
    return last;
}

// ---------------------------------------------------------------------------
// AbstractedEnv

AbstractedEnv::AbstractedEnv(GroundMDP mdp, Abstraction phi) : mdp_(std::move(mdp)), phi_(std::move(phi)) {
    mdp_.check_shape();
    if (phi_.n_states() != mdp_.n_states) {
        throw InvalidArgument("abstraction covers " + std::to_string(phi_.n_states()) + " states, MDP has " +
                              std::to_string(mdp_.n_states));
    }
    if (mdp_.start_state && !mdp_.valid_state(*mdp_.start_state)) {
        throw InvalidArgument("start state " + std::to_string(*mdp_.start_state) + " out of range");
    }
}

AbstractIndex AbstractedEnv::reset(std::uint64_t seed) {
    rng_ = CounterRng(seed);
    if (mdp_.start_state) {
        current_ = *mdp_.start_state;
    } else {
        current_ = static_cast<StateIndex>(rng_.below(static_cast<std::uint64_t>(mdp_.n_states)));
    }
    return phi_(*current_);
}

Observation AbstractedEnv::step(ActionIndex a) {
    if (!current_) {
        throw StateError("environment stepped before reset");
    }
    if (!mdp_.valid_action(a)) {
        throw InvalidArgument("action " + std::to_string(a) + " out of range");
    }
    const StateIndex s = *current_;
    const StateIndex next = sample_index(mdp_.row(s, a), rng_.uniform());
    current_ = next;
    return {phi_(next), mdp_.R(s, a)};
}

AbstractIndex AbstractedEnv::observe() const {
    if (!current_) {
        throw StateError("environment observed before reset");
    }
    return phi_(*current_);
}

StateIndex AbstractedEnv::hidden_state() const {
    if (!current_) {
        throw StateError("environment inspected before reset");
    }
    return *current_;
}

// ---------------------------------------------------------------------------
// SampleStore

SampleStore::SampleStore(Abstraction phi, int n_actions) : phi_(std::move(phi)), n_actions_(n_actions) {
    if (n_actions <= 0) {
        throw InvalidArgument("sample store needs at least one action");
    }
    const auto pairs = static_cast<std::size_t>(phi_.n_abstract()) * static_cast<std::size_t>(n_actions);
    xs_.resize(pairs);
    ys_.resize(pairs);
}

std::size_t SampleStore::index(AbstractIndex b, ActionIndex a) const {
    if (b < 0 || b >= phi_.n_abstract() || a < 0 || a >= n_actions_) {
        throw InvalidArgument("abstract pair (" + std::to_string(b) + ", " + std::to_string(a) + ") out of range");
    }
    return static_cast<std::size_t>(b) * static_cast<std::size_t>(n_actions_) + static_cast<std::size_t>(a);
}

void SampleStore::record(AbstractIndex b, ActionIndex a, StateIndex source, AbstractIndex outcome) {
    const std::size_t i = index(b, a);
    if (source < 0 || source >= phi_.n_states() || phi_(source) != b) {
        throw ContractViolation("source state " + std::to_string(source) + " is not a member of abstract state " +
                                std::to_string(b));
    }
    if (outcome < 0 || outcome >= phi_.n_abstract()) {
        throw ContractViolation("outcome " + std::to_string(outcome) + " is not an abstract state");
    }
    xs_[i].push_back(source);
    ys_[i].push_back(outcome);
}

std::size_t SampleStore::total() const noexcept {
    std::size_t n = 0;
    for (const auto& y : ys_) n += y.size();
    return n;
}

// ---------------------------------------------------------------------------

namespace {

void require_visited(const SampleStore& store, AbstractIndex b, ActionIndex a) {
    if (store.count(b, a) == 0) {
        throw DomainError("abstract pair (" + std::to_string(b) + ", " + std::to_string(a) + ") has no samples");
    }
}

}  // namespace

std::vector<double> empirical_row(const SampleStore& store, AbstractIndex b, ActionIndex a) {
    require_visited(store, b, a);
    std::vector<double> counts(static_cast<std::size_t>(store.n_abstract()), 0.0);
    for (AbstractIndex y : store.outcomes(b, a)) {
        counts[static_cast<std::size_t>(y)] += 1.0;
    }
    const double n = store.count(b, a);
    for (auto& c : counts) c /= n;
    return counts;
}

AbstractModel empirical_model(const SampleStore& store, const AbstractModel& defaults) {
    if (defaults.n_states != store.n_abstract() || defaults.n_actions != store.n_actions()) {
        throw InvalidArgument("default model does not match the sample store");
    }
    AbstractModel out = defaults;
    for (AbstractIndex b = 0; b < store.n_abstract(); ++b) {
        for (ActionIndex a = 0; a < store.n_actions(); ++a) {
            if (store.count(b, a) == 0) continue;
            const auto row = empirical_row(store, b, a);
            std::copy(row.begin(), row.end(), out.row(b, a).begin());
        }
    }
    return out;
}

WeightingFn empirical_weighting(const SampleStore& store) {
    const auto& phi = store.abstraction();
    const int na = store.n_actions();
    std::vector<double> w(static_cast<std::size_t>(phi.n_states()) * static_cast<std::size_t>(na), 0.0);
    std::vector<bool> defined(static_cast<std::size_t>(phi.n_abstract()) * static_cast<std::size_t>(na), false);
    for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
        for (ActionIndex a = 0; a < na; ++a) {
            const int n = store.count(b, a);
            if (n == 0) continue;
            defined[static_cast<std::size_t>(b * na + a)] = true;
            std::vector<int> hits(static_cast<std::size_t>(phi.n_states()), 0);
            for (StateIndex x : store.sources(b, a)) ++hits[static_cast<std::size_t>(x)];
            for (StateIndex s : phi.block(b)) {
                w[static_cast<std::size_t>(s * na + a)] =
                    static_cast<double>(hits[static_cast<std::size_t>(s)]) / static_cast<double>(n);
            }
        }
    }
    WeightingFn out(phi.n_states(), na, std::move(w));
    out.restrict_domain(std::move(defined), phi.n_abstract());
    return out;
}

std::vector<double> induced_row(const TabularModel& m, const SampleStore& store, AbstractIndex b, ActionIndex a) {
    require_visited(store, b, a);
    const auto& phi = store.abstraction();
    std::vector<double> out(static_cast<std::size_t>(phi.n_abstract()), 0.0);
    for (StateIndex x : store.sources(b, a)) {
        const auto lifted = lift_transition(m, phi, x, a);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += lifted[j];
    }
    const double n = store.count(b, a);
    for (auto& v : out) v /= n;
    return out;
}

AbstractModel induced_target(const TabularModel& m, const SampleStore& store) {
    const auto& phi = store.abstraction();
    if (m.n_states != phi.n_states() || m.n_actions != store.n_actions()) {
        throw InvalidArgument("model does not match the sample store");
    }
    AbstractModel out(phi.n_abstract(), m.n_actions, m.r_max);
    for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
        for (ActionIndex a = 0; a < m.n_actions; ++a) {
            auto dst = out.row(b, a);
            if (store.count(b, a) == 0) {
                dst[static_cast<std::size_t>(b)] = 1.0;
                continue;
            }
            const auto row = induced_row(m, store, b, a);
            std::copy(row.begin(), row.end(), dst.begin());
            double r = 0.0;
            for (StateIndex x : store.sources(b, a)) r += m.R(x, a);
            out.R(b, a) = r / static_cast<double>(store.count(b, a));
        }
    }
    return out;
}

AbstractModel induced_target_weighted(const TabularModel& m, const SampleStore& store) {
    return build_abstract_mdp(m, store.abstraction(), empirical_weighting(store));
}

// ---------------------------------------------------------------------------
// Simulator collection

SimulatorSample collect_simulator(const TabularModel& m, const Abstraction& phi, int count, PrototypeRule rule,
                                  std::uint64_t seed) {
    if (m.n_states != phi.n_states()) {
        throw InvalidArgument("abstraction does not match the model");
    }
    if (count < 0) {
        throw InvalidArgument("sample count must be nonnegative");
    }
    SimulatorSample out{SampleStore(phi, m.n_actions), count, {}};
    const CounterRng root(seed);
    for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
        for (ActionIndex a = 0; a < m.n_actions; ++a) {
            CounterRng rng = root.split({static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(a)});
            const auto& members = phi.block(b);
            StateIndex x = members.front();
            if (rule == PrototypeRule::random_member) {
                x = members[static_cast<std::size_t>(rng.below(members.size()))];
            }
            out.prototypes.push_back(x);
            const auto row = m.row(x, a);
            for (int i = 0; i < count; ++i) {
                out.store.record(b, a, x, phi(sample_index(row, rng.uniform())));
            }
        }
    }
    return out;
}

SimulatorSample collect_simulator(const TabularModel& m, const Abstraction& phi, double delta, double eps,
                                  PrototypeRule rule, std::uint64_t seed) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidArgument("delta must lie in (0, 1)");
    }
    const double kappa = delta / (static_cast<double>(phi.n_abstract()) * m.n_actions);
    const auto count =
        std::max<std::int64_t>(1, samples_needed(phi.n_abstract(), kappa, eps, SampleVariant::iid_simulator));
    if (count > std::numeric_limits<int>::max()) {
        throw InvalidArgument("simulator sample count too large");
    }
    return collect_simulator(m, phi, static_cast<int>(count), rule, seed);
}

std::vector<TraceRecord> collect_trace(AbstractedEnv& env, std::int64_t steps, std::uint64_t seed) {
    if (steps < 0) throw InvalidArgument("collect_trace: steps must be non-negative");
    env.reset(seed);
    CounterRng actions = CounterRng(seed).split({1});
    std::vector<TraceRecord> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (std::int64_t t = 0; t < steps; ++t) {
        TraceRecord r;
        r.step = t;
        r.state = env.observe();
        r.hidden = env.hidden_state();
        r.action = static_cast<ActionIndex>(actions.below(static_cast<std::uint64_t>(env.n_actions())));
        r.next_state = env.step(r.action).state;
        out.push_back(r);
    }
    return out;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRecord> records, bool expose_ground) {
    out << (expose_ground ? "step,abstract_state,action,hidden_state,next_abstract_state\n"
                          : "step,abstract_state,action,next_abstract_state\n");
    for (const auto& r : records) {
        out << r.step << ',' << r.state << ',' << r.action << ',';
        if (expose_ground) out << r.hidden << ',';
        out << r.next_state << '\n';
    }
}

}  // namespace rlao

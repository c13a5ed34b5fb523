#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rlao/abstraction.hpp"
#include "rlao/mdp.hpp"
#include "rlao/rng.hpp"

namespace rlao {

/// Inverse-CDF draw from `row` with a single uniform `u` in [0, 1).
StateIndex sample_index(std::span<const double> row, double u);

struct Observation {
    AbstractIndex state = 0;
    double reward = 0.0;
};

/// Environment that hides the ground state and emits phi(s). One RNG draw
/// per transition; reset draws once more only when the MDP has no start state.
class AbstractedEnv {
public:
    AbstractedEnv(GroundMDP mdp, Abstraction phi);

    AbstractIndex reset(std::uint64_t seed);
    /// Samples s' ~ T(.|s, a) and returns (phi(s'), R(s, a)). Throws
    /// StateError before the first reset.
    Observation step(ActionIndex a);

    [[nodiscard]] AbstractIndex observe() const;
    [[nodiscard]] bool is_reset() const noexcept { return current_.has_value(); }

    [[nodiscard]] const GroundMDP& mdp() const noexcept { return mdp_; }
    [[nodiscard]] const Abstraction& abstraction() const noexcept { return phi_; }
    [[nodiscard]] int n_abstract() const noexcept { return phi_.n_abstract(); }
    [[nodiscard]] int n_actions() const noexcept { return mdp_.n_actions; }
    [[nodiscard]] double r_max() const noexcept { return mdp_.r_max; }
    [[nodiscard]] std::uint64_t draws() const noexcept { return rng_.draws(); }

    /// Verification mode only: the hidden ground state.
    [[nodiscard]] StateIndex hidden_state() const;

private:
    GroundMDP mdp_;
    Abstraction phi_;
    std::optional<StateIndex> current_;
    CounterRng rng_;
};

/// Per-(abstract state, action) sequences of source ground states X and
/// observed abstract outcomes Y.
class SampleStore {
public:
    SampleStore() = default;
    SampleStore(Abstraction phi, int n_actions);

    /// Throws ContractViolation when phi(source) != b.
    void record(AbstractIndex b, ActionIndex a, StateIndex source, AbstractIndex outcome);

    [[nodiscard]] int count(AbstractIndex b, ActionIndex a) const {
        return static_cast<int>(ys_[index(b, a)].size());
    }
    [[nodiscard]] const std::vector<StateIndex>& sources(AbstractIndex b, ActionIndex a) const {
        return xs_[index(b, a)];
    }
    [[nodiscard]] const std::vector<AbstractIndex>& outcomes(AbstractIndex b, ActionIndex a) const {
        return ys_[index(b, a)];
    }
    [[nodiscard]] int n_abstract() const noexcept { return phi_.n_abstract(); }
    [[nodiscard]] int n_actions() const noexcept { return n_actions_; }
    [[nodiscard]] const Abstraction& abstraction() const noexcept { return phi_; }
    [[nodiscard]] std::size_t total() const noexcept;

private:
    [[nodiscard]] std::size_t index(AbstractIndex b, ActionIndex a) const;

    Abstraction phi_;
    int n_actions_ = 0;
    std::vector<std::vector<StateIndex>> xs_;
    std::vector<std::vector<AbstractIndex>> ys_;
};

/// Frequency row T_Y(.|b, a); requires count > 0.
std::vector<double> empirical_row(const SampleStore& store, AbstractIndex b, ActionIndex a);

/// T_Y for visited pairs; unvisited pairs keep the row of `defaults`.
/// Rewards are copied from `defaults`.
AbstractModel empirical_model(const SampleStore& store, const AbstractModel& defaults);

/// omega_X(s, a) = share of X entries equal to s. Unvisited pairs are
/// outside the returned function's domain.
WeightingFn empirical_weighting(const SampleStore& store);

/// T_{omega_X}(.|b, a) as the mean of lift_transition over the recorded
/// sources; requires count > 0.
std::vector<double> induced_row(const TabularModel& m, const SampleStore& store, AbstractIndex b, ActionIndex a);

/// Induced target by averaging lifted rows over X (visited pairs). Rewards
/// are the matching averages of R. Unvisited pairs hold a unit self-loop
/// with zero reward, as in build_abstract_mdp outside a weighting's domain.
AbstractModel induced_target(const TabularModel& m, const SampleStore& store);

/// Same quantity through build_abstract_mdp with omega_X.
AbstractModel induced_target_weighted(const TabularModel& m, const SampleStore& store);

enum class PrototypeRule { lowest_index, random_member };

struct SimulatorSample {
    SampleStore store;
    int samples_per_pair = 0;
    std::vector<StateIndex> prototypes;  // by (b * n_actions + a)
};

/// Generative-model collection: one prototype per pair, `count` iid draws
/// from its row. Each pair uses its own stream split from `seed`.
SimulatorSample collect_simulator(const TabularModel& m, const Abstraction& phi, int count, PrototypeRule rule,
                                  std::uint64_t seed);

/// As above with count = samples_needed(iid_simulator, |S̄|, delta/(|S̄||A|), eps), at least 1.
SimulatorSample collect_simulator(const TabularModel& m, const Abstraction& phi, double delta, double eps,
                                  PrototypeRule rule, std::uint64_t seed);

struct TraceRecord {
    std::int64_t step = 0;
    AbstractIndex state = 0;
    ActionIndex action = 0;
    StateIndex hidden = -1;
    AbstractIndex next_state = 0;
};

/// Online trace of `steps` transitions under uniformly random actions, from
/// reset(seed). Action draws use a stream separate from the environment's.
std::vector<TraceRecord> collect_trace(AbstractedEnv& env, std::int64_t steps, std::uint64_t seed);

/// CSV with header; the hidden column is written only when `expose_ground`.
void write_trace_csv(std::ostream& out, std::span<const TraceRecord> records, bool expose_ground);

}  // namespace rlao

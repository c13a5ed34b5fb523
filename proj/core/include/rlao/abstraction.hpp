#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rlao/mdp.hpp"
#include "rlao/rng.hpp"

namespace rlao {

using AbstractIndex = int;

/// Surjective map from ground states onto [0, n_abstract). Blocks list the
/// ground members of each abstract state in ascending order.
class Abstraction {
public:
    Abstraction() = default;

    /// Throws InvalidArgument unless `map` is total and surjective onto
    /// [0, n_abstract).
    Abstraction(std::vector<AbstractIndex> map, int n_abstract);

    /// Infers n_abstract as max(map) + 1.
    static Abstraction from_map(std::vector<AbstractIndex> map);
    static Abstraction identity(int n_states);
    /// Every ground state in one abstract state.
    static Abstraction single_block(int n_states);
    /// Relabels abstract states in order of their smallest ground member.
    static Abstraction canonical(std::span<const AbstractIndex> map);

    [[nodiscard]] AbstractIndex operator()(StateIndex s) const { return map_.at(static_cast<std::size_t>(s)); }
    [[nodiscard]] int n_states() const noexcept { return static_cast<int>(map_.size()); }
    [[nodiscard]] int n_abstract() const noexcept { return n_abstract_; }
    [[nodiscard]] const std::vector<AbstractIndex>& map() const noexcept { return map_; }
    [[nodiscard]] const std::vector<StateIndex>& block(AbstractIndex b) const {
        return blocks_.at(static_cast<std::size_t>(b));
    }
    [[nodiscard]] const std::vector<std::vector<StateIndex>>& blocks() const noexcept { return blocks_; }

    friend bool operator==(const Abstraction& a, const Abstraction& b) {
        return a.n_abstract_ == b.n_abstract_ && a.map_ == b.map_;
    }

private:
    std::vector<AbstractIndex> map_;
    int n_abstract_ = 0;
    std::vector<std::vector<StateIndex>> blocks_;
};

/// Action-specific weights over ground states, dense by (state, action).
/// Weights of the members of each block must sum to one per action. An
/// optional domain mask restricts the function to some (block, action)
/// pairs; pairs outside the domain are not validated and cannot be queried.
class WeightingFn {
public:
    WeightingFn() = default;
    WeightingFn(int n_states, int n_actions, std::vector<double> weights);

    static WeightingFn uniform(const Abstraction& phi, int n_actions);
    /// Weight one on `prototype[b * n_actions + a]` for every pair (b, a).
    static WeightingFn indicator(const Abstraction& phi, int n_actions, std::span<const StateIndex> prototype);

    [[nodiscard]] int n_states() const noexcept { return n_states_; }
    [[nodiscard]] int n_actions() const noexcept { return n_actions_; }
    /// Throws InvalidArgument on bad indices. Domain checks need the
    /// abstraction and are done by `at`.
    [[nodiscard]] double operator()(StateIndex s, ActionIndex a) const;
    /// Throws DomainError when (phi(s), a) lies outside the domain.
    [[nodiscard]] double at(const Abstraction& phi, StateIndex s, ActionIndex a) const;
    [[nodiscard]] double raw(StateIndex s, ActionIndex a) const {
        return weights_[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions_) +
                        static_cast<std::size_t>(a)];
    }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

    /// Restrict to the pairs with `defined[b * n_actions + a]` set.
    void restrict_domain(std::vector<bool> defined, int n_abstract);
    [[nodiscard]] bool in_domain(const Abstraction& phi, StateIndex s, ActionIndex a) const;
    [[nodiscard]] bool pair_in_domain(AbstractIndex b, ActionIndex a) const;
    [[nodiscard]] bool has_domain_mask() const noexcept { return !domain_.empty(); }

private:
    int n_states_ = 0;
    int n_actions_ = 0;
    std::vector<double> weights_;
    std::vector<bool> domain_;  // by (block, action); empty means total
    int domain_blocks_ = 0;
};

/// Model over abstract states. Also used for empirical and optimistic models.
struct AbstractModel : TabularModel {
    AbstractModel() = default;
    AbstractModel(int n_abstract, int actions, double rmax) : TabularModel(n_abstract, actions, rmax) {}
    explicit AbstractModel(TabularModel base) : TabularModel(std::move(base)) {}

    [[nodiscard]] int n_abstract() const noexcept { return n_states; }
};

/// Every pair a unit self-loop with reward r_max.
AbstractModel optimistic_model(int n_abstract, int n_actions, double r_max);

struct SimilarityErrors {
    double eta_r = 0.0;
    double eta_t = 0.0;
};

/// T(b'|s,a) = sum of T(s'|s,a) over s' in block b'.
std::vector<double> lift_transition(const TabularModel& m, const Abstraction& phi, StateIndex s, ActionIndex a);

/// One row of the weighted abstract model: sum over s in b of w(s,a) * lifted row.
std::vector<double> weighted_row(const TabularModel& m, const Abstraction& phi, const WeightingFn& w,
                                 AbstractIndex b, ActionIndex a);

ValidationReport validate_weighting(const WeightingFn& w, const Abstraction& phi);

/// Abstract MDP with weighted-average rewards and lifted transitions.
/// Throws ContractViolation naming the first (block, action) whose weights
/// are invalid.
AbstractModel build_abstract_mdp(const TabularModel& m, const Abstraction& phi, const WeightingFn& w);

/// Tightest (eta_R, eta_T) for which phi is an approximate model similarity
/// abstraction of m.
SimilarityErrors measure_similarity(const TabularModel& m, const Abstraction& phi);

/// Largest deviations between an abstract model and the members of each
/// block: |Rbar(b,a) - R(s,a)| and |Tbar(b'|b,a) - T(b'|s,a)| for s in b.
SimilarityErrors premise_errors(const TabularModel& m, const Abstraction& phi, const TabularModel& abstract);

/// Entrywise maximum deviations between two models on the same spaces.
SimilarityErrors model_distance(const TabularModel& a, const TabularModel& b);

/// Sum of |p - q|.
double l1_distance(std::span<const double> p, std::span<const double> q);

struct BenchmarkSpec {
    int n_abstract = 2;
    std::vector<int> block_sizes;  // one entry per abstract state
    int n_actions = 1;
    double target_eta_t = 0.0;
    double target_eta_r = 0.0;
    double r_max = 1.0;
    std::uint64_t seed = 0;

    friend bool operator==(const BenchmarkSpec&, const BenchmarkSpec&) = default;
};

/// Random (MDP, abstraction) pair whose measured errors do not exceed the
/// targets. Ground states are numbered block by block, so the abstraction is
/// canonical. Deterministic in the seed.
std::pair<GroundMDP, Abstraction> generate_benchmark(const BenchmarkSpec& spec);

/// Shift a probability row by a random offset of at most `cap` per entry,
/// keeping it a distribution. Used for bounded perturbations.
std::vector<double> perturb_row(std::span<const double> row, double cap, CounterRng& rng);

}  // namespace rlao

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rlao/abstraction.hpp"
#include "rlao/mdp.hpp"
#include "rlao/sampling.hpp"

namespace rlao {

struct RMaxConfig {
    double delta = 0.1;
    double eps = 0.1;
    int t_eps = 1;
    int m_known = 1;
    std::int64_t max_steps = 1'000'000;
    std::uint64_t seed = 0;
    /// Steps of final-policy execution after every pair is known; 0 selects
    /// 10 * t_eps * |S̄|. Not counted against max_steps.
    std::int64_t eval_window = 0;

    /// Throws InvalidArgument on out-of-range fields.
    void validate() const;

    friend bool operator==(const RMaxConfig&, const RMaxConfig&) = default;
};

/// Learner state: optimistic model, samples, and known flags. Unknown pairs
/// hold a unit self-loop paying r_max; known pairs hold the empirical row of
/// their first m_known samples and the observed reward.
class RMaxState {
public:
    RMaxState(Abstraction phi, int n_actions, double r_max, int m_known);

    [[nodiscard]] const AbstractModel& model() const noexcept { return model_; }
    [[nodiscard]] const SampleStore& store() const noexcept { return store_; }
    [[nodiscard]] bool known(AbstractIndex b, ActionIndex a) const;
    [[nodiscard]] int known_count() const noexcept { return known_count_; }
    [[nodiscard]] bool all_known() const noexcept { return known_count_ == n_pairs(); }
    [[nodiscard]] int n_pairs() const noexcept { return model_.n_states * model_.n_actions; }
    [[nodiscard]] int m_known() const noexcept { return m_known_; }

    /// Records one transition. Samples are kept only while N < m_known; the
    /// return value says whether this sample made N reach m_known. Throws
    /// ModelViolation when the reward differs from an earlier one for the pair.
    bool observe(AbstractIndex b, ActionIndex a, StateIndex source, AbstractIndex outcome, double reward);

    /// Freezes the pair's row. Throws ContractViolation unless N = m_known
    /// and the pair is not yet known.
    void mark_known(AbstractIndex b, ActionIndex a);

private:
    [[nodiscard]] std::size_t index(AbstractIndex b, ActionIndex a) const;

    AbstractModel model_;
    SampleStore store_;
    std::vector<bool> known_;
    std::vector<bool> reward_seen_;
    std::vector<double> reward_;
    int m_known_ = 1;
    int known_count_ = 0;
};

/// Optimal t-step nonstationary policy of the current model, over all
/// abstract states, lowest-index ties.
Policy optimistic_plan(const RMaxState& state, int t_eps);

struct StepRecord {
    std::int64_t step = 0;
    AbstractIndex state = 0;
    ActionIndex action = 0;
    AbstractIndex next_state = 0;
    double reward = 0.0;
    int known_count = 0;
    int episode = 0;
    StateIndex hidden = -1;  // source ground state, verification only
};

struct EpisodeRecord {
    std::int64_t start_step = 0;
    int policy_id = 0;
    int steps = 0;
    bool became_known = false;
    bool exploit = false;
    double realized_return = 0.0;
};

struct RunResult {
    bool complete = false;
    std::int64_t steps_to_all_known = -1;  // -1 when incomplete
    Policy final_policy;
    AbstractModel final_model;
    std::vector<EpisodeRecord> episodes;
    std::vector<StepRecord> log;
    double exploit_average_return = 0.0;
    std::int64_t exploit_steps = 0;
    SampleStore store;
};

/// R-MAX on an environment that is already reset.
RunResult rmax_run(AbstractedEnv& env, const RMaxConfig& cfg);
/// Builds the environment and resets it with cfg.seed.
RunResult rmax_run(const GroundMDP& m, const Abstraction& phi, const RMaxConfig& cfg);
/// The same procedure with the identity abstraction.
RunResult rmax_baseline_run(const GroundMDP& m, const RMaxConfig& cfg);

/// CSV: step,abstract_state,action,next_abstract_state,reward,known_count,episode_id.
void write_run_log_csv(std::ostream& out, std::span<const StepRecord> log);

}  // namespace rlao

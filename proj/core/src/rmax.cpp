#include "rlao/rmax.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rlao/bounds.hpp"
#include "rlao/errors.hpp"

namespace rlao {

void RMaxConfig::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (t_eps < 1) throw InvalidArgument("t_eps must be at least 1");
    if (m_known < 1) throw InvalidArgument("m_known must be at least 1");
    if (max_steps < 0) throw InvalidArgument("max_steps must be nonnegative");
    if (eval_window < 0) throw InvalidArgument("eval_window must be nonnegative");
}

RMaxState::RMaxState(Abstraction phi, int n_actions, double r_max, int m_known)
    : model_(optimistic_model(phi.n_abstract(), n_actions, r_max)),
      store_(std::move(phi), n_actions),
      known_(static_cast<std::size_t>(n_pairs()), false),
      reward_seen_(static_cast<std::size_t>(n_pairs()), false),
      reward_(static_cast<std::size_t>(n_pairs()), 0.0),
      m_known_(m_known) {
    if (m_known < 1) throw InvalidArgument("m_known must be at least 1");
}

std::size_t RMaxState::index(AbstractIndex b, ActionIndex a) const {
    if (!model_.valid_state(b) || !model_.valid_action(a)) {
        throw InvalidArgument("abstract pair (" + std::to_string(b) + ", " + std::to_string(a) + ") out of range");
    }
    return static_cast<std::size_t>(b * model_.n_actions + a);
}

bool RMaxState::known(AbstractIndex b, ActionIndex a) const { return known_[index(b, a)]; }

bool RMaxState::observe(AbstractIndex b, ActionIndex a, StateIndex source, AbstractIndex outcome, double reward) {
    const std::size_t i = index(b, a);
    if (!reward_seen_[i]) {
        reward_seen_[i] = true;
        reward_[i] = reward;
    } else if (std::abs(reward_[i] - reward) > 1e-12) {
        throw ModelViolation("reward of abstract pair (" + std::to_string(b) + ", " + std::to_string(a) +
                             ") changed from " + format_double(reward_[i]) + " to " + format_double(reward));
    }
    if (store_.count(b, a) >= m_known_) return false;
    store_.record(b, a, source, outcome);
    return store_.count(b, a) == m_known_;
}

void RMaxState::mark_known(AbstractIndex b, ActionIndex a) {
    const std::size_t i = index(b, a);
    if (known_[i]) {
        throw ContractViolation("abstract pair (" + std::to_string(b) + ", " + std::to_string(a) +
                                ") is already known");
    }
    if (store_.count(b, a) != m_known_) {
        throw ContractViolation("abstract pair (" + std::to_string(b) + ", " + std::to_string(a) + ") has " +
                                std::to_string(store_.count(b, a)) + " samples, needs " + std::to_string(m_known_));
    }
    const auto row = empirical_row(store_, b, a);
    std::copy(row.begin(), row.end(), model_.row(b, a).begin());
    model_.R(b, a) = reward_[i];
    known_[i] = true;
    ++known_count_;
}

Policy optimistic_plan(const RMaxState& state, int t_eps) { return solve_finite(state.model(), t_eps).policy; }

RunResult rmax_run(AbstractedEnv& env, const RMaxConfig& cfg) {
    cfg.validate();
    if (!env.is_reset()) {
        throw StateError("rmax_run needs a reset environment");
    }
    RMaxState st(env.abstraction(), env.n_actions(), env.r_max(), cfg.m_known);
    RunResult out;
    std::int64_t step = 0;

    auto act = [&](const Policy& policy, int remaining, EpisodeRecord& ep, int episode_id) {
        const AbstractIndex b = env.observe();
        const ActionIndex a = policy.action(b, remaining);
        const StateIndex x = env.hidden_state();
        const Observation obs = env.step(a);
        bool became = false;
        if (!ep.exploit) became = st.observe(b, a, x, obs.state, obs.reward);
        ++ep.steps;
        ep.realized_return += obs.reward;
        out.log.push_back({step, b, a, obs.state, obs.reward, st.known_count(), episode_id, x});
        ++step;
        if (became) {
            st.mark_known(b, a);
            ep.became_known = true;
            out.log.back().known_count = st.known_count();
        }
        return became;
    };

    int episode_id = 0;
    while (!st.all_known() && step < cfg.max_steps) {
        const Policy policy = optimistic_plan(st, cfg.t_eps);
        EpisodeRecord ep{step, episode_id, 0, false, false, 0.0};
        for (int remaining = cfg.t_eps; remaining >= 1 && step < cfg.max_steps; --remaining) {
            if (act(policy, remaining, ep, episode_id)) break;
        }
        out.episodes.push_back(ep);
        ++episode_id;
    }

    out.complete = st.all_known();
    out.final_model = st.model();
    out.final_policy = optimistic_plan(st, cfg.t_eps);
    if (out.complete) {
        out.steps_to_all_known = step;
        const std::int64_t window =
            cfg.eval_window > 0 ? cfg.eval_window
                                : 10 * static_cast<std::int64_t>(cfg.t_eps) * env.n_abstract();
        double total = 0.0;
        std::int64_t done = 0;
        while (done < window) {
            EpisodeRecord ep{step, episode_id, 0, false, true, 0.0};
            for (int remaining = cfg.t_eps; remaining >= 1 && done < window; --remaining, ++done) {
                act(out.final_policy, remaining, ep, episode_id);
            }
            total += ep.realized_return;
            out.episodes.push_back(ep);
            ++episode_id;
        }
        out.exploit_steps = window;
        out.exploit_average_return = total / static_cast<double>(window);
    }
    out.store = st.store();
    return out;
}

RunResult rmax_run(const GroundMDP& m, const Abstraction& phi, const RMaxConfig& cfg) {
    AbstractedEnv env(m, phi);
    env.reset(cfg.seed);
    return rmax_run(env, cfg);
}

RunResult rmax_baseline_run(const GroundMDP& m, const RMaxConfig& cfg) {
    return rmax_run(m, Abstraction::identity(m.n_states), cfg);
}

void write_run_log_csv(std::ostream& out, std::span<const StepRecord> log) {
    out << "step,abstract_state,action,next_abstract_state,reward,known_count,episode_id\n";
    for (const auto& r : log) {
        out << r.step << ',' << r.state << ',' << r.action << ',' << r.next_state << ',' << format_double(r.reward)
            << ',' << r.known_count << ',' << r.episode << '\n';
    }
}

}  // namespace rlao

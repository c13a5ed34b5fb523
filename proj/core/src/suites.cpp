#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "rlao/bounds.hpp"
#include "rlao/dependence.hpp"
#include "rlao/errors.hpp"
#include "rlao/experiments.hpp"
#include "rlao/rmax.hpp"
#include "rlao/rng.hpp"
#include "rlao/sampling.hpp"

namespace rlao {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

class Inputs {
public:
    Inputs& add(const std::string& key, double v) { return put(key, format_double(v)); }
    Inputs& add(const std::string& key, std::int64_t v) { return put(key, std::to_string(v)); }
    Inputs& add(const std::string& key, int v) { return put(key, std::to_string(v)); }
    Inputs& add(const std::string& key, const std::string& v) { return put(key, v); }
    [[nodiscard]] std::string str() const { return s_; }

private:
    Inputs& put(const std::string& key, const std::string& v) {
        if (!s_.empty()) s_ += ';';
        s_ += key + '=' + v;
        return *this;
    }
    std::string s_;
};

SuiteRow row(std::string id, std::string inputs, double measured, double bound, double threshold, bool pass,
             bool gating = true) {
    return {std::move(id), std::move(inputs), measured, bound, threshold, pass, gating};
}

double binomial_se(double p, std::int64_t n) {
    return n > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
}

std::uint64_t u64(std::int64_t x) { return static_cast<std::uint64_t>(x); }

// Lifts an abstract nonstationary policy to ground states.
Policy lift_policy(const Policy& abstract, const Abstraction& phi, int h) {
    std::vector<std::vector<ActionIndex>> table(static_cast<std::size_t>(h),
                                                std::vector<ActionIndex>(static_cast<std::size_t>(phi.n_states())));
    for (int k = 1; k <= h; ++k) {
        for (StateIndex s = 0; s < phi.n_states(); ++s) {
            table[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(s)] = abstract.action(phi(s), k);
        }
    }
    return Policy::nonstationary(std::move(table));
}

Policy lift_stationary(const Policy& abstract, const Abstraction& phi) {
    std::vector<ActionIndex> actions(static_cast<std::size_t>(phi.n_states()));
    for (StateIndex s = 0; s < phi.n_states(); ++s) actions[static_cast<std::size_t>(s)] = abstract.action(phi(s));
    return Policy::stationary(std::move(actions));
}

Policy random_policy(int n_states, int n_actions, int h, CounterRng& rng) {
    std::vector<std::vector<ActionIndex>> table(static_cast<std::size_t>(h),
                                                std::vector<ActionIndex>(static_cast<std::size_t>(n_states)));
    for (auto& layer : table) {
        for (auto& a : layer) a = static_cast<ActionIndex>(rng.below(static_cast<std::uint64_t>(n_actions)));
    }
    return Policy::nonstationary(std::move(table));
}

WeightingFn random_weighting(const Abstraction& phi, int n_actions, CounterRng& rng) {
    std::vector<double> w(static_cast<std::size_t>(phi.n_states() * n_actions), 0.0);
    for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
        for (ActionIndex a = 0; a < n_actions; ++a) {
            double total = 0.0;
            for (StateIndex s : phi.block(b)) {
                const double x = rng.uniform() + 0.01;
                w[static_cast<std::size_t>(s * n_actions + a)] = x;
                total += x;
            }
            for (StateIndex s : phi.block(b)) w[static_cast<std::size_t>(s * n_actions + a)] /= total;
        }
    }
    return {phi.n_states(), n_actions, std::move(w)};
}

template <class T>
double max_abs_diff(const ValueTable& ground, const T& abstract_at) {
    double worst = 0.0;
    for (std::size_t s = 0; s < ground.size(); ++s) {
        worst = std::max(worst, std::abs(ground.values[s] - abstract_at(static_cast<StateIndex>(s))));
    }
    return worst;
}

double max_loss(const ValueTable& best, const ValueTable& other) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < best.size(); ++s) worst = std::max(worst, best.values[s] - other.values[s]);
    return worst;
}

TargetPair checked_target(const ExperimentConfig& cfg, const TabularModel& m, const Abstraction& phi) {
    const auto t = cfg.concentration.target;
    if (t.state < 0 || t.state >= phi.n_abstract() || t.action < 0 || t.action >= m.n_actions) {
        throw ConfigError("concentration target pair out of range");
    }
    return t;
}

std::pair<GroundMDP, Abstraction> checked_instance(const ExperimentConfig& cfg) {
    auto inst = materialize(cfg.instance);
    if (inst.second.n_states() != inst.first.n_states) {
        throw ConfigError("abstraction does not cover the MDP's states");
    }
    return inst;
}

}  // namespace

// ---------------------------------------------------------------------------

SuiteReport run_counterexample_suite(const ExperimentConfig& cfg) {
    const auto started = Clock::now();
    SuiteReport report;
    report.kind = SuiteKind::counterexample;
    const auto [m, phi] = checked_instance(cfg);
    const StateIndex start = m.start_state.value_or(0);
    const TargetPair target{phi(start), 0};
    const auto reports = dependence_report(m, phi, start, target);

    for (const auto& r : reports) {
        report.rows.push_back(row("joint_" + std::to_string(r.u) + "_" + std::to_string(r.v),
                                  Inputs().add("u", r.u).add("v", r.v).str(), r.joint, r.product, r.gap, true, false));
    }
    // Joint probabilities never exceed the first-visit marginal.
    double worst = -1.0;
    for (AbstractIndex u = 0; u < phi.n_abstract(); ++u) {
        double total = 0.0;
        double first = 0.0;
        for (const auto& r : reports) {
            if (r.u == u) {
                total += r.joint;
                first = r.marginal_first;
            }
        }
        worst = std::max(worst, total - first);
    }
    report.rows.push_back(row("joint_within_marginal", "", worst, 0.0, 1e-12, worst <= 1e-12));

    if (cfg.instance.type == InstanceSpec::Type::fixture) {
        const AbstractIndex b = 1;
        const auto it = std::find_if(reports.begin(), reports.end(), [&](const auto& r) { return r.u == b && r.v == b; });
        if (it == reports.end()) throw ContractViolation("fixture report lacks the (B, B) entry");
        const double tol = 1e-12;
        auto exact = [&](const std::string& id, double measured, double expected) {
            const double err = std::abs(measured - expected);
            report.rows.push_back(row(id, Inputs().add("expected", expected).str(), measured, expected, tol, err <= tol));
        };
        exact("pr_first_B", it->marginal_first, 0.6);
        exact("pr_second_B", it->marginal_second, 0.52);
        exact("joint_B_B", it->joint, 0.36);
        exact("product_B_B", it->product, 0.312);
        report.rows.push_back(row("dependent_B_B", "", std::abs(it->gap), 0.0, tol, std::abs(it->gap) > tol));
        report.notes.push_back("joint(B,B)=" + format_double(it->joint) + " product=" + format_double(it->product));
    }
    report.pass_rule = "fixture rows: |measured - bound| <= threshold; joint mass within first-visit marginal";
    report.runtime_seconds = seconds_since(started);
    return report;
}

// ---------------------------------------------------------------------------

namespace {

struct TrialOutcome {
    bool valid = false;
    double l1 = 0.0;
    double form_gap = 0.0;
};

const char* sampler_label(SamplerKind k) {
    switch (k) {
        case SamplerKind::online: return "online";
        case SamplerKind::simulator: return "simulator";
        case SamplerKind::independent: return "independent";
    }
    return "?";
}

TrialOutcome online_trial(const GroundMDP& m, const Abstraction& phi, TargetPair target, int n, std::int64_t cap,
                          CounterRng trial) {
    AbstractedEnv env(m, phi);
    env.reset(trial.split({0})());
    CounterRng actions = trial.split({1});
    SampleStore store(phi, m.n_actions);
    std::int64_t steps = 0;
    while (store.count(target.state, target.action) < n && steps < cap) {
        const AbstractIndex b = env.observe();
        const auto a = static_cast<ActionIndex>(actions.below(static_cast<std::uint64_t>(m.n_actions)));
        const StateIndex x = env.hidden_state();
        const auto obs = env.step(a);
        ++steps;
        if (b == target.state && a == target.action) store.record(b, a, x, obs.state);
    }
    TrialOutcome out;
    if (store.count(target.state, target.action) < n) return out;
    out.valid = true;
    out.l1 = l1_distance(empirical_row(store, target.state, target.action),
                         induced_row(m, store, target.state, target.action));
    const auto d = model_distance(induced_target(m, store), induced_target_weighted(m, store));
    out.form_gap = std::max(d.eta_t, d.eta_r);
    return out;
}

TrialOutcome iid_trial(const GroundMDP& m, const Abstraction& phi, TargetPair target, int n, bool round_robin,
                       CounterRng trial) {
    const auto& members = phi.block(target.state);
    SampleStore store(phi, m.n_actions);
    for (int i = 0; i < n; ++i) {
        const StateIndex x = round_robin ? members[static_cast<std::size_t>(i) % members.size()] : members.front();
        const StateIndex next = sample_index(m.row(x, target.action), trial.uniform());
        store.record(target.state, target.action, x, phi(next));
    }
    TrialOutcome out;
    out.valid = true;
    const auto reference = round_robin ? induced_row(m, store, target.state, target.action)
                                       : lift_transition(m, phi, members.front(), target.action);
    out.l1 = l1_distance(empirical_row(store, target.state, target.action), reference);
    return out;
}

}  // namespace

SuiteReport run_concentration_suite(const ExperimentConfig& cfg, int workers) {
    const auto started = Clock::now();
    if (workers <= 0) workers = default_workers();
    SuiteReport report;
    report.kind = SuiteKind::concentration;
    const auto [m, phi] = checked_instance(cfg);
    const auto& sec = cfg.concentration;
    const TargetPair target = checked_target(cfg, m, phi);
    const int nbar = phi.n_abstract();
    const CounterRng root(cfg.seed);
    const char* label = sampler_label(sec.sampler);
    const bool strict = sec.sampler == SamplerKind::online;  // failure is L1 > eps, else L1 >= eps
    double worst_form_gap = 0.0;

    for (const int n : sec.sample_sizes) {
        std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
        parallel_for(outcomes.size(), workers, [&](std::size_t t) {
            const CounterRng trial = root.split({u64(n), t});
            switch (sec.sampler) {
                case SamplerKind::online: outcomes[t] = online_trial(m, phi, target, n, sec.step_cap, trial); break;
                case SamplerKind::simulator: outcomes[t] = iid_trial(m, phi, target, n, false, trial); break;
                case SamplerKind::independent: outcomes[t] = iid_trial(m, phi, target, n, true, trial); break;
            }
        });
        std::int64_t valid = 0;
        for (const auto& o : outcomes) {
            if (!o.valid) continue;
            ++valid;
            worst_form_gap = std::max(worst_form_gap, o.form_gap);
        }
        if (valid < cfg.trials) {
            report.notes.push_back("N=" + std::to_string(n) + ": discarded " + std::to_string(cfg.trials - valid) +
                                   " trials that hit the step cap");
        }
        for (const double eps : sec.eps) {
            std::int64_t failures = 0;
            for (const auto& o : outcomes) {
                if (o.valid && (strict ? o.l1 > eps : o.l1 >= eps)) ++failures;
            }
            BoundReport bound;
            switch (sec.sampler) {
                case SamplerKind::online: bound = abstract_l1_bound(nbar, n, eps); break;
                case SamplerKind::simulator: bound = weissman_bound(nbar, n, eps); break;
                case SamplerKind::independent: bound = noniid_l1_bound(nbar, n, eps); break;
            }
            const double p = valid > 0 ? static_cast<double>(failures) / static_cast<double>(valid) : 1.0;
            const double threshold = bound.clamped + cfg.tolerance_se * binomial_se(p, valid);
            report.rows.push_back(row("N" + std::to_string(n) + "_eps" + format_double(eps),
                                      Inputs()
                                          .add("sampler", std::string(label))
                                          .add("N", n)
                                          .add("eps", eps)
                                          .add("trials", valid)
                                          .add("failures", failures)
                                          .add("bound_raw", bound.raw)
                                          .str(),
                                      p, bound.clamped, threshold, valid > 0 && p <= threshold));
        }
    }
    if (sec.sampler == SamplerKind::online) {
        report.rows.push_back(row("induced_forms_agree", "", worst_form_gap, 0.0, 1e-12, worst_form_gap <= 1e-12));
    }
    report.pass_rule = std::string("empirical failure rate <= clamped bound + ") + format_double(cfg.tolerance_se) +
                       " binomial SE per cell; failure event L1 " + (strict ? ">" : ">=") + " eps";
    report.runtime_seconds = seconds_since(started);
    return report;
}

// ---------------------------------------------------------------------------

namespace {

// Tracks the case of smallest margin (threshold - measured) for one check.
struct Worst {
    explicit Worst(std::string n) : name(std::move(n)) {}

    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    double threshold = std::numeric_limits<double>::infinity();
    std::string where;
    bool seen = false;

    void consider(double m, double b, double slack, const std::string& at) {
        const double t = b + slack;
        if (!seen || t - m < threshold - measured) {
            measured = m;
            bound = b;
            threshold = t;
            where = at;
            seen = true;
        }
    }
};

struct InstanceRows {
    std::vector<SuiteRow> rows;
};

std::string horizon_label(const HorizonSpec& h) {
    return h.discounted ? "gamma=" + format_double(h.gamma) : "h=" + std::to_string(h.h);
}

InstanceRows value_bound_instance(const ValueBoundsSection& sec, std::uint64_t seed, std::size_t index) {
    CounterRng rng = CounterRng(seed).split({index});
    BenchmarkSpec spec;
    spec.n_abstract = 1 + static_cast<int>(rng.below(u64(sec.max_abstract)));
    const int total = spec.n_abstract + static_cast<int>(rng.below(u64(sec.max_states - spec.n_abstract + 1)));
    spec.block_sizes.assign(static_cast<std::size_t>(spec.n_abstract), 1);
    for (int i = spec.n_abstract; i < total; ++i) ++spec.block_sizes[rng.below(u64(spec.n_abstract))];
    spec.n_actions = 1 + static_cast<int>(rng.below(u64(sec.max_actions)));
    const bool exact = sec.exact_every > 0 && index % static_cast<std::size_t>(sec.exact_every) == 0;
    spec.target_eta_t = exact ? 0.0 : sec.max_eta_t * rng.uniform();
    spec.target_eta_r = exact ? 0.0 : sec.max_eta_r * rng.uniform();
    spec.r_max = 1.0;
    spec.seed = rng();
    const auto [m, phi] = generate_benchmark(spec);

    const int n = m.n_states;
    const int na = m.n_actions;
    const int nbar = phi.n_abstract();
    const double r = m.r_max;
    const int h_max = *std::max_element(sec.horizons.begin(), sec.horizons.end());
    const SimilarityErrors sim = measure_similarity(m, phi);
    const double slack = sec.slack;
    const double slack_d = sec.slack + 1e-7;  // value iteration tolerance
    const double vi_tol = 1e-11;

    Worst loss_tight{"value_loss"}, loss_loose{"value_loss_loose"}, policy_gap{"policy_value_gap"},
        optimal_gap{"optimal_value_gap"}, sim_gap{"simulation_gap"}, learned{"learned_model_loss"},
        explore{"explore_exploit"}, zero{"exact_zero_loss"};

    std::vector<ValueTable> vstar;
    for (int h : sec.horizons) vstar.push_back(value_finite(m, kOptimal, h));
    std::vector<ValueTable> vstar_d;
    for (double g : sec.gammas) vstar_d.push_back(value_discounted(m, g, kOptimal, vi_tol).values);

    const WeightingFn weightings[] = {WeightingFn::uniform(phi, na), random_weighting(phi, na, rng)};
    const char* weighting_names[] = {"uniform", "random"};
    for (int wi = 0; wi < 2; ++wi) {
        const AbstractModel mbar = build_abstract_mdp(m, phi, weightings[wi]);
        const SimilarityErrors prem = premise_errors(m, phi, mbar);
        const Policy abstract_random = random_policy(nbar, na, h_max, rng);

        AbstractModel mhat = mbar;
        for (AbstractIndex b = 0; b < nbar; ++b) {
            for (ActionIndex a = 0; a < na; ++a) {
                const auto moved = perturb_row(mbar.row(b, a), sec.model_eps * rng.uniform(), rng);
                std::copy(moved.begin(), moved.end(), mhat.row(b, a).begin());
            }
        }
        const double model_eps = model_distance(mbar, mhat).eta_t;

        for (std::size_t hi = 0; hi < sec.horizons.size(); ++hi) {
            const int h = sec.horizons[hi];
            const auto spec_h = HorizonSpec::finite(h);
            const std::string at = std::string(weighting_names[wi]) + "/" + horizon_label(spec_h);
            const auto bar = solve_finite(mbar, h);
            const auto loss = max_loss(vstar[hi], value_finite(m, lift_policy(bar.policy, phi, h), h));
            loss_tight.consider(loss, value_loss_bound(sim.eta_r, sim.eta_t, nbar, r, spec_h, LossForm::tight), slack,
                          at);
            loss_loose.consider(loss, value_loss_bound(sim.eta_r, sim.eta_t, nbar, r, spec_h, LossForm::loose),
                           slack, at);
            if (exact) zero.consider(loss, 0.0, slack, at);

            const double gap_bound = value_gap_abstraction(prem.eta_r, prem.eta_t, nbar, r, spec_h);
            for (const Policy* pi : {&bar.policy, &abstract_random}) {
                const auto abstract_v = value_finite(mbar, *pi, h);
                const auto ground_v = value_finite(m, lift_policy(*pi, phi, h), h);
                policy_gap.consider(max_abs_diff(ground_v, [&](StateIndex s) { return abstract_v[phi(s)]; }), gap_bound,
                              slack, at);
            }
            optimal_gap.consider(max_abs_diff(vstar[hi], [&](StateIndex s) { return bar.values[phi(s)]; }),
                          value_gap_abstraction(prem.eta_r, prem.eta_t, nbar, r, spec_h, GapKind::optimal_pair), slack,
                          at);

            const auto hat = solve_finite(mhat, h);
            learned.consider(max_loss(vstar[hi], value_finite(m, lift_policy(hat.policy, phi, h), h)),
                          learned_model_loss(sim.eta_r, sim.eta_t, model_eps, nbar, r, h), slack, at);
        }

        for (std::size_t gi = 0; gi < sec.gammas.size(); ++gi) {
            const double g = sec.gammas[gi];
            const auto spec_g = HorizonSpec::discount(g);
            const std::string at = std::string(weighting_names[wi]) + "/" + horizon_label(spec_g);
            const auto bar = value_discounted(mbar, g, kOptimal, vi_tol);
            const Policy lifted = lift_stationary(bar.policy, phi);
            const auto ground_v = value_discounted(m, g, lifted, vi_tol).values;
            const auto loss = max_loss(vstar_d[gi], ground_v);
            loss_tight.consider(loss, value_loss_bound(sim.eta_r, sim.eta_t, nbar, r, spec_g, LossForm::tight),
                          slack_d, at);
            loss_loose.consider(loss, value_loss_bound(sim.eta_r, sim.eta_t, nbar, r, spec_g, LossForm::loose),
                           slack_d, at);
            if (exact) zero.consider(loss, 0.0, slack_d, at);
            const auto abstract_v = value_discounted(mbar, g, bar.policy, vi_tol).values;
            policy_gap.consider(max_abs_diff(ground_v, [&](StateIndex s) { return abstract_v[phi(s)]; }),
                          value_gap_abstraction(prem.eta_r, prem.eta_t, nbar, r, spec_g), slack_d, at);
            optimal_gap.consider(max_abs_diff(vstar_d[gi], [&](StateIndex s) { return bar.values[phi(s)]; }),
                          value_gap_abstraction(prem.eta_r, prem.eta_t, nbar, r, spec_g, GapKind::optimal_pair),
                          slack_d, at);
        }
    }

    // Two models on the ground state space.
    GroundMDP moved = m;
    for (StateIndex s = 0; s < n; ++s) {
        for (ActionIndex a = 0; a < na; ++a) {
            const auto row = perturb_row(m.row(s, a), 0.5 * sec.max_eta_t * rng.uniform(), rng);
            std::copy(row.begin(), row.end(), moved.row(s, a).begin());
            const double shift = sec.max_eta_r * (rng.uniform() - 0.5);
            moved.R(s, a) = std::clamp(m.R(s, a) + shift, 0.0, r);
        }
    }
    const SimilarityErrors dist = model_distance(m, moved);
    const Policy ground_random = random_policy(n, na, h_max, rng);
    for (int h : sec.horizons) {
        const std::string at = "h=" + std::to_string(h);
        const double bound = simulation_lemma_bound(dist.eta_r, dist.eta_t, n, r, h);
        const Policy opt = solve_finite(m, h).policy;
        for (const Policy* pi : {&opt, &ground_random}) {
            const auto a = value_finite(m, *pi, h);
            const auto b = value_finite(moved, *pi, h);
            sim_gap.consider(max_abs_diff(a, [&](StateIndex s) { return b[s]; }), bound, slack, at);
        }
    }

    std::vector<bool> known_ground(static_cast<std::size_t>(n * na));
    for (auto&& k : known_ground) k = rng.below(2) == 1;
    std::vector<bool> known_abstract(static_cast<std::size_t>(nbar * na));
    for (auto&& k : known_abstract) k = rng.below(2) == 1;
    for (int h : sec.horizons) {
        const Policy opt = solve_finite(m, h).policy;
        for (const Policy* pi : {&opt, &ground_random}) {
            for (StateIndex s = 0; s < n; ++s) {
                const std::string at = "h=" + std::to_string(h) + "/start=" + std::to_string(s);
                const auto g = explore_exploit_check(m, known_ground, *pi, h, s);
                explore.consider(g.rhs, g.lhs, 1e-10, at + "/ground");
                const auto ab = explore_exploit_check(m, phi, known_abstract, *pi, h, s);
                explore.consider(ab.rhs, ab.lhs, 1e-10, at + "/abstract");
            }
        }
    }

    InstanceRows out;
    const std::string base = Inputs()
                                 .add("states", n)
                                 .add("abstract", nbar)
                                 .add("actions", na)
                                 .add("eta_t", sim.eta_t)
                                 .add("eta_r", sim.eta_r)
                                 .str();
    for (const Worst* w : {&loss_tight, &loss_loose, &policy_gap, &optimal_gap, &sim_gap, &learned, &explore, &zero}) {
        if (!w->seen) continue;
        out.rows.push_back(row("i" + std::to_string(index) + "/" + w->name, base + ";worst_at=" + w->where,
                               w->measured, w->bound, w->threshold, w->measured <= w->threshold));
    }
    return out;
}

}  // namespace

SuiteReport run_value_bound_suite(const ExperimentConfig& cfg, int workers) {
    const auto started = Clock::now();
    if (workers <= 0) workers = default_workers();
    SuiteReport report;
    report.kind = SuiteKind::value_bounds;
    const auto& sec = cfg.value_bounds;
    std::vector<InstanceRows> per(static_cast<std::size_t>(sec.count));
    parallel_for(per.size(), workers, [&](std::size_t i) { per[i] = value_bound_instance(sec, cfg.seed, i); });
    for (auto& p : per) {
        for (auto& r : p.rows) report.rows.push_back(std::move(r));
    }
    report.pass_rule = "every instance: measured <= bound + slack (" + format_double(sec.slack) +
                       " finite horizon, +1e-7 discounted, 1e-10 explore-exploit)";
    report.runtime_seconds = seconds_since(started);
    return report;
}

// ---------------------------------------------------------------------------

namespace {

struct MartingaleInstance {
    GroundMDP mdp;
    Abstraction phi;
    std::string label;
};

MartingaleInstance random_martingale_instance(const MartingaleSection& sec, std::uint64_t seed, std::size_t k) {
    CounterRng rng = CounterRng(seed).split({1000, k});
    const std::uint64_t mdp_seed = rng();
    auto m = random_mdp(sec.random_states, sec.random_actions, 1.0, mdp_seed);
    std::vector<AbstractIndex> map(static_cast<std::size_t>(sec.random_states));
    for (std::size_t s = 0; s < map.size(); ++s) {
        map[s] = static_cast<int>(s) < sec.random_blocks ? static_cast<AbstractIndex>(s)
                                                         : static_cast<AbstractIndex>(rng.below(u64(sec.random_blocks)));
    }
    for (std::size_t i = map.size() - 1; i > 0; --i) std::swap(map[i], map[rng.below(i + 1)]);
    m.start_state = 0;
    return {std::move(m), Abstraction::canonical(map), "random" + std::to_string(k)};
}

}  // namespace

SuiteReport run_martingale_suite(const ExperimentConfig& cfg, int workers) {
    const auto started = Clock::now();
    if (workers <= 0) workers = default_workers();
    SuiteReport report;
    report.kind = SuiteKind::martingale;
    const auto& sec = cfg.martingale;

    std::vector<MartingaleInstance> instances;
    {
        auto [m, phi] = checked_instance(cfg);
        if (phi.n_abstract() > 10) throw ConfigError("martingale suite needs at most 10 abstract states");
        instances.push_back({std::move(m), std::move(phi), "instance"});
    }
    for (int k = 0; k < sec.random_instances; ++k) {
        instances.push_back(random_martingale_instance(sec, cfg.seed, static_cast<std::size_t>(k)));
    }

    struct Result {
        double residual = 0.0;
        double max_z = 0.0;
        std::int64_t histories = 0;
    };
    std::vector<Result> results(instances.size());
    parallel_for(instances.size(), workers, [&](std::size_t i) {
        const auto& inst = instances[i];
        const int nbar = inst.phi.n_abstract();
        const auto behavior = AbstractBehavior::uniform(nbar, inst.mdp.n_actions);
        const StateIndex start = inst.mdp.start_state.value_or(0);
        std::vector<double> z(static_cast<std::size_t>(nbar));
        Result res;
        for (AbstractIndex b = 0; b < nbar; ++b) {
            for (ActionIndex a = 0; a < inst.mdp.n_actions; ++a) {
                for (std::uint32_t bits = 0; bits < (1u << nbar); ++bits) {
                    for (int j = 0; j < nbar; ++j) z[static_cast<std::size_t>(j)] = (bits >> j) & 1u ? 1.0 : -1.0;
                    const auto entries = martingale_residuals(inst.mdp, inst.phi, start, {b, a}, z, sec.depth, behavior);
                    for (const auto& e : entries) {
                        res.residual = std::max(res.residual, std::abs(e.residual));
                        res.max_z = std::max(res.max_z, e.max_abs_z);
                        ++res.histories;
                    }
                }
            }
        }
        results[i] = res;
    });

    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& inst = instances[i];
        const auto& res = results[i];
        const std::string inputs = Inputs()
                                       .add("states", inst.mdp.n_states)
                                       .add("abstract", inst.phi.n_abstract())
                                       .add("actions", inst.mdp.n_actions)
                                       .add("depth", sec.depth)
                                       .add("histories", res.histories)
                                       .str();
        report.rows.push_back(row(inst.label + "/residual", inputs, res.residual, 0.0, sec.tolerance,
                                  res.residual < sec.tolerance));
        report.rows.push_back(row(inst.label + "/z_bound", inputs, res.max_z, 2.0, 2.0 + 1e-12, res.max_z <= 2.0 + 1e-12));
    }
    report.pass_rule = "max |E[Z_i | history]| < " + format_double(sec.tolerance) +
                       " and |Z_i| <= 2 over all +-1 z vectors, target pairs, and histories";
    report.runtime_seconds = seconds_since(started);
    return report;
}

// ---------------------------------------------------------------------------

SuiteReport run_simulator_suite(const ExperimentConfig& cfg, int workers) {
    const auto started = Clock::now();
    if (workers <= 0) workers = default_workers();
    SuiteReport report;
    report.kind = SuiteKind::simulator_sampling;
    const auto [m, phi] = checked_instance(cfg);
    const auto& sec = cfg.simulator;
    const int nbar = phi.n_abstract();
    const int na = m.n_actions;
    const CounterRng root(cfg.seed);

    std::uint64_t cell = 0;
    for (const double delta : sec.delta) {
        for (const double eps : sec.eps) {
            const double kappa = delta / static_cast<double>(nbar * na);
            const auto count = std::max<std::int64_t>(1, samples_needed(nbar, kappa, eps, SampleVariant::iid_simulator));
            std::vector<char> failed(static_cast<std::size_t>(cfg.trials), 0);
            parallel_for(failed.size(), workers, [&](std::size_t t) {
                const auto sample = collect_simulator(m, phi, delta, eps, sec.prototype, root.split({cell, t})());
                for (AbstractIndex b = 0; b < nbar && !failed[t]; ++b) {
                    for (ActionIndex a = 0; a < na; ++a) {
                        const StateIndex x = sample.prototypes[static_cast<std::size_t>(b * na + a)];
                        if (l1_distance(empirical_row(sample.store, b, a), lift_transition(m, phi, x, a)) >= eps) {
                            failed[t] = 1;
                            break;
                        }
                    }
                }
            });
            const auto failures = static_cast<std::int64_t>(std::count(failed.begin(), failed.end(), 1));
            const double p = static_cast<double>(failures) / static_cast<double>(cfg.trials);
            const double threshold = delta + cfg.tolerance_se * binomial_se(p, cfg.trials);
            report.rows.push_back(row("delta" + format_double(delta) + "_eps" + format_double(eps),
                                      Inputs()
                                          .add("delta", delta)
                                          .add("eps", eps)
                                          .add("samples_per_pair", count)
                                          .add("trials", static_cast<std::int64_t>(cfg.trials))
                                          .add("failures", failures)
                                          .str(),
                                      p, delta, threshold, p <= threshold));
            for (const auto variant : {SampleVariant::martingale, SampleVariant::iid_simulator}) {
                const auto needed = samples_needed(nbar, kappa, eps, variant);
                const bool minimal = sample_count_suffices(needed, nbar, kappa, eps, variant) &&
                                     (needed <= 1 || !sample_count_suffices(needed - 1, nbar, kappa, eps, variant));
                const std::string name = variant == SampleVariant::martingale ? "martingale" : "iid_simulator";
                report.rows.push_back(row("samples_needed_" + name + "_delta" + format_double(delta) + "_eps" +
                                              format_double(eps),
                                          Inputs().add("kappa", kappa).add("eps", eps).str(),
                                          static_cast<double>(needed), sample_requirement(nbar, kappa, eps, variant),
                                          static_cast<double>(needed), minimal));
            }
            ++cell;
        }
    }
    report.pass_rule = "failure rate of any pair with L1 >= eps <= delta + " + format_double(cfg.tolerance_se) +
                       " binomial SE; sample counts pass at m and fail at m - 1";
    report.runtime_seconds = seconds_since(started);
    return report;
}

// ---------------------------------------------------------------------------

SuiteReport run_rmax_compare(const ExperimentConfig& cfg, int workers) {
    const auto started = Clock::now();
    if (workers <= 0) workers = default_workers();
    SuiteReport report;
    report.kind = SuiteKind::rmax_compare;
    const auto [m, phi] = checked_instance(cfg);
    if (!is_ergodic_under_uniform(m)) {
        throw PreconditionError("rmax_compare needs an instance whose uniform-policy chain is irreducible");
    }
    const auto& sec = cfg.rmax;
    const int t = sec.run.t_eps;
    const SimilarityErrors sim = measure_similarity(m, phi);
    const double g = g_function(t, sim.eta_r, sim.eta_t, phi.n_abstract(), m.r_max);
    const auto vstar = value_finite(m, kOptimal, t);
    const double opt = *std::max_element(vstar.values.begin(), vstar.values.end()) / static_cast<double>(t);
    const double target = rmax_return_target(opt, g, t, sec.run.eps);

    struct Pair {
        RunResult abstracted;
        RunResult baseline;
    };
    std::vector<Pair> runs(static_cast<std::size_t>(sec.seeds));
    parallel_for(runs.size(), workers, [&](std::size_t k) {
        RMaxConfig run = sec.run;
        run.seed = cfg.seed + k;
        runs[k].abstracted = rmax_run(m, phi, run);
        runs[k].baseline = rmax_baseline_run(m, run);
        runs[k].abstracted.log.clear();
        runs[k].baseline.log.clear();
    });

    int return_passes = 0;
    int speed_passes = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto& a = runs[k].abstracted;
        const auto& b = runs[k].baseline;
        const bool ret_ok = a.complete && a.exploit_average_return >= target;
        const bool fast = a.complete && (!b.complete || a.steps_to_all_known < b.steps_to_all_known);
        return_passes += ret_ok ? 1 : 0;
        speed_passes += fast ? 1 : 0;
        const std::string id = "seed" + std::to_string(cfg.seed + k);
        const std::string inputs = Inputs()
                                       .add("complete", a.complete ? 1 : 0)
                                       .add("baseline_complete", b.complete ? 1 : 0)
                                       .add("baseline_return", b.exploit_average_return)
                                       .str();
        report.rows.push_back(row(id + "/return", inputs, a.exploit_average_return, target, target, ret_ok, false));
        report.rows.push_back(row(id + "/steps_to_all_known", inputs, static_cast<double>(a.steps_to_all_known),
                                  static_cast<double>(b.steps_to_all_known), static_cast<double>(b.steps_to_all_known),
                                  fast, false));
    }
    const std::string inputs = Inputs()
                                   .add("seeds", sec.seeds)
                                   .add("opt", opt)
                                   .add("g", g)
                                   .add("eta_t", sim.eta_t)
                                   .add("eta_r", sim.eta_r)
                                   .add("t_eps", t)
                                   .add("eps", sec.run.eps)
                                   .add("m_known", sec.run.m_known)
                                   .str();
    report.rows.push_back(row("return_passes", inputs, return_passes, target, sec.min_return_passes,
                              return_passes >= sec.min_return_passes));
    report.rows.push_back(
        row("speed_passes", inputs, speed_passes, 0.0, sec.min_speed_passes, speed_passes >= sec.min_speed_passes));
    report.notes.push_back("return target Opt - 3g/T - 2eps = " + format_double(target));
    report.pass_rule = "return_passes >= " + std::to_string(sec.min_return_passes) + " and speed_passes >= " +
                       std::to_string(sec.min_speed_passes) + " of " + std::to_string(sec.seeds) +
                       " seeds (counts are measured, the threshold is a lower limit)";
    report.runtime_seconds = seconds_since(started);
    return report;
}

}  // namespace rlao

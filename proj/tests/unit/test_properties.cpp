// Cross-module properties over seeded random instances.
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "property.hpp"
#include "rlao/abstraction.hpp"
#include "rlao/bounds.hpp"
#include "rlao/dependence.hpp"
#include "rlao/mdp.hpp"
#include "rlao/sampling.hpp"

namespace rlao {
namespace {

Policy lift(const Policy& abstract, const Abstraction& phi) {
    const int n = phi.n_states();
    if (abstract.is_stationary()) {
        std::vector<ActionIndex> out(static_cast<std::size_t>(n));
        for (StateIndex s = 0; s < n; ++s) out[static_cast<std::size_t>(s)] = abstract.action(phi(s));
        return Policy::stationary(out);
    }
    std::vector<std::vector<ActionIndex>> table(static_cast<std::size_t>(abstract.horizon()),
                                                std::vector<ActionIndex>(static_cast<std::size_t>(n)));
    for (int k = 1; k <= abstract.horizon(); ++k) {
        for (StateIndex s = 0; s < n; ++s) {
            table[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(s)] = abstract.action(phi(s), k);
        }
    }
    return Policy::nonstationary(table);
}

struct Instance {
    GroundMDP m;
    Abstraction phi;
};

Instance random_instance(std::uint64_t seed) {
    CounterRng rng(seed);
    const int n = 3 + static_cast<int>(rng.below(5));
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const int na = 1 + static_cast<int>(rng.below(3));
    return {oracle::dense_random_mdp(n, na, seed), oracle::random_abstraction(n, k, seed)};
}

TEST(Property, LiftedAbstractOptimumWithinLossBound) {
    prop::for_seeds(200, [](std::uint64_t seed) {
        const auto [m, phi] = random_instance(seed);
        const auto bar = build_abstract_mdp(m, phi, WeightingFn::uniform(phi, m.n_actions));
        const auto sim = measure_similarity(m, phi);
        for (int h = 1; h <= 4; ++h) {
            const auto vstar = value_finite(m, kOptimal, h);
            const auto vlift = value_finite(m, lift(solve_finite(bar, h).policy, phi), h);
            const double bound = value_loss_bound(sim.eta_r, sim.eta_t, phi.n_abstract(), m.r_max,
                                                     HorizonSpec::finite(h));
            for (StateIndex s = 0; s < m.n_states; ++s) {
                EXPECT_LE(vstar[s] - vlift[s], bound + 1e-9) << "h=" << h << " s=" << s;
                EXPECT_GE(vstar[s] - vlift[s], -1e-12);
            }
        }
    });
}

TEST(Property, AbstractValueTracksLiftedValue) {
    prop::for_seeds(200, [](std::uint64_t seed) {
        const auto [m, phi] = random_instance(seed);
        CounterRng rng(seed + 1);
        std::vector<double> w(static_cast<std::size_t>(m.n_states * m.n_actions));
        for (auto& x : w) x = rng.uniform() + 0.05;
        for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
            for (ActionIndex a = 0; a < m.n_actions; ++a) {
                double total = 0.0;
                for (StateIndex s : phi.block(b)) total += w[static_cast<std::size_t>(s * m.n_actions + a)];
                for (StateIndex s : phi.block(b)) w[static_cast<std::size_t>(s * m.n_actions + a)] /= total;
            }
        }
        const auto bar = build_abstract_mdp(m, phi, WeightingFn(m.n_states, m.n_actions, w));
        const auto prem = premise_errors(m, phi, bar);
        const int h = 1 + static_cast<int>(seed % 4);
        std::vector<ActionIndex> acts(static_cast<std::size_t>(phi.n_abstract()));
        for (auto& a : acts) a = static_cast<ActionIndex>(rng.below(static_cast<std::uint64_t>(m.n_actions)));
        const auto pi = Policy::stationary(acts);
        const auto vbar = value_finite(bar, pi, h);
        const auto vlift = value_finite(m, lift(pi, phi), h);
        const double gap =
            value_gap_abstraction(prem.eta_r, prem.eta_t, phi.n_abstract(), m.r_max, HorizonSpec::finite(h));
        for (StateIndex s = 0; s < m.n_states; ++s) {
            EXPECT_LE(std::abs(vbar[phi(s)] - vlift[s]), gap + 1e-9);
        }
    });
}

TEST(Property, DiscountedLossWithinBound) {
    prop::for_seeds(60, [](std::uint64_t seed) {
        const auto [m, phi] = random_instance(seed);
        const double gamma = seed % 2 ? 0.9 : 0.5;
        const auto bar = build_abstract_mdp(m, phi, WeightingFn::uniform(phi, m.n_actions));
        const auto sim = measure_similarity(m, phi);
        const auto vstar = value_discounted(m, gamma, kOptimal, 1e-11);
        const auto abstract_opt = value_discounted(bar, gamma, kOptimal, 1e-11);
        const auto vlift = value_discounted(m, gamma, lift(abstract_opt.policy, phi), 1e-11);
        const double bound =
            value_loss_bound(sim.eta_r, sim.eta_t, phi.n_abstract(), m.r_max, HorizonSpec::discount(gamma));
        for (StateIndex s = 0; s < m.n_states; ++s) {
            EXPECT_LE(vstar.values[static_cast<std::size_t>(s)] - vlift.values[static_cast<std::size_t>(s)],
                      bound + 1e-7);
        }
    });
}

TEST(Property, SimulationLemmaOnPerturbedModels) {
    prop::for_seeds(150, [](std::uint64_t seed) {
        const auto m = oracle::dense_random_mdp(5, 2, seed);
        CounterRng rng(seed * 7 + 3);
        auto other = m;
        for (StateIndex s = 0; s < 5; ++s) {
            for (ActionIndex a = 0; a < 2; ++a) {
                const auto row = perturb_row(m.row(s, a), 0.2 * rng.uniform(), rng);
                std::copy(row.begin(), row.end(), other.row(s, a).begin());
                other.R(s, a) = std::clamp(m.R(s, a) + 0.1 * (rng.uniform() - 0.5), 0.0, 1.0);
            }
        }
        const auto d = model_distance(m, other);
        const auto pi = Policy::stationary({0, 1, 1, 0, 1});
        for (int n = 1; n <= 4; ++n) {
            const auto va = value_finite(m, pi, n);
            const auto vb = value_finite(other, pi, n);
            const double bound = simulation_lemma_bound(d.eta_r, d.eta_t, 5, 1.0, n);
            for (StateIndex s = 0; s < 5; ++s) EXPECT_LE(std::abs(va[s] - vb[s]), bound + 1e-12);
        }
    });
}

TEST(Property, SampleCountMonotone) {
    prop::for_seeds(300, [](std::uint64_t seed) {
        CounterRng rng(seed);
        const int n = 1 + static_cast<int>(rng.below(8));
        const double k1 = 0.001 + 0.9 * rng.uniform();
        const double k2 = std::min(0.999, k1 + 0.09 * rng.uniform());
        const double e1 = 0.05 + 1.8 * rng.uniform();
        const double e2 = std::min(1.99, e1 + 0.1 * rng.uniform());
        for (auto v : {SampleVariant::martingale, SampleVariant::iid_simulator}) {
            const auto m = samples_needed(n, k1, e1, v);
            EXPECT_GE(m, 1);
            EXPECT_TRUE(sample_count_suffices(m, n, k1, e1, v));
            if (m > 1) {
                EXPECT_FALSE(sample_count_suffices(m - 1, n, k1, e1, v));
            }
            EXPECT_LE(samples_needed(n, k2, e1, v), m);
            EXPECT_LE(samples_needed(n, k1, e2, v), m);
            EXPECT_LE(m, samples_needed(n + 1, k1, e1, v));
        }
        // The simulator count is never the larger one.
        EXPECT_LE(samples_needed(n, k1, e1, SampleVariant::iid_simulator),
                  samples_needed(n, k1, e1, SampleVariant::martingale));
    });
}

TEST(Property, ProbabilityBoundsDecreaseInSamples) {
    prop::for_seeds(200, [](std::uint64_t seed) {
        CounterRng rng(seed);
        const int n = 1 + static_cast<int>(rng.below(10));
        const double eps = 0.01 + rng.uniform();
        const double a = 100.0 * rng.uniform();
        const double b = a + 50.0 * rng.uniform();
        EXPECT_GE(weissman_bound(n, a, eps).raw, weissman_bound(n, b, eps).raw);
        EXPECT_GE(abstract_l1_bound(n, a, eps).raw, abstract_l1_bound(n, b, eps).raw);
        EXPECT_LE(abstract_l1_bound(n, a, eps).clamped, 1.0);
        EXPECT_GE(weissman_bound(n, a, eps).clamped, 0.0);
    });
}

TEST(Property, EmpiricalAndInducedRowsAreDistributions) {
    prop::for_seeds(60, [](std::uint64_t seed) {
        const auto [m, phi] = random_instance(seed);
        AbstractedEnv env(m, phi);
        env.reset(seed);
        CounterRng rng(seed ^ 0xabcULL);
        SampleStore store(phi, m.n_actions);
        for (int t = 0; t < 150; ++t) {
            const auto b = env.observe();
            const auto x = env.hidden_state();
            const auto a = static_cast<ActionIndex>(rng.below(static_cast<std::uint64_t>(m.n_actions)));
            store.record(b, a, x, env.step(a).state);
        }
        for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
            for (ActionIndex a = 0; a < m.n_actions; ++a) {
                if (store.count(b, a) == 0) continue;
                for (const auto& row : {empirical_row(store, b, a), induced_row(m, store, b, a)}) {
                    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
                    for (double p : row) EXPECT_GE(p, 0.0);
                }
            }
        }
    });
}

TEST(Property, JointMassWithinMarginals) {
    prop::for_seeds(80, [](std::uint64_t seed) {
        const auto [m, phi] = random_instance(seed);
        const TargetPair target{phi(0), 0};
        const auto rs = dependence_report(m, phi, 0, target, AbstractBehavior::uniform(phi.n_abstract(), m.n_actions));
        std::vector<double> row_mass(static_cast<std::size_t>(phi.n_abstract()), 0.0);
        double first = 0.0;
        for (const auto& r : rs) {
            row_mass[static_cast<std::size_t>(r.u)] += r.joint;
            EXPECT_GE(r.joint, 0.0);
            if (r.v == 0) first += r.marginal_first;
        }
        EXPECT_LE(first, 1.0 + 1e-12);
        for (const auto& r : rs) {
            if (r.v == 0) {
                EXPECT_LE(row_mass[static_cast<std::size_t>(r.u)], r.marginal_first + 1e-12);
            }
        }
    });
}

TEST(Property, CanonicalIsIdempotentAndPartitions) {
    prop::for_seeds(100, [](std::uint64_t seed) {
        const auto [m, phi] = random_instance(seed);
        EXPECT_EQ(Abstraction::canonical(phi.map()).map(), phi.map());
        std::vector<int> seen(static_cast<std::size_t>(m.n_states), 0);
        for (AbstractIndex b = 0; b < phi.n_abstract(); ++b) {
            ASSERT_FALSE(phi.block(b).empty());
            for (StateIndex s : phi.block(b)) {
                ++seen[static_cast<std::size_t>(s)];
                EXPECT_EQ(phi(s), b);
            }
        }
        for (int c : seen) EXPECT_EQ(c, 1);
    });
}

}  // namespace
}  // namespace rlao

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "property.hpp"
#include "rlao/abstraction.hpp"
#include "rlao/errors.hpp"
#include "rlao/experiments.hpp"

namespace rlao {
namespace {

TEST(Abstraction, BlocksAreSortedPreimages) {
    const Abstraction phi({1, 0, 1, 2, 0}, 3);
    EXPECT_EQ(phi.block(0), (std::vector<StateIndex>{1, 4}));
    EXPECT_EQ(phi.block(1), (std::vector<StateIndex>{0, 2}));
    EXPECT_EQ(phi.block(2), (std::vector<StateIndex>{3}));
    EXPECT_EQ(phi(3), 2);
}

TEST(Abstraction, RejectsNonSurjectiveOrOutOfRange) {
    EXPECT_THROW(Abstraction({0, 0, 2}, 3), InvalidArgument);
    EXPECT_THROW(Abstraction({0, 3}, 3), InvalidArgument);
    EXPECT_THROW(Abstraction({0, -1}, 2), InvalidArgument);
}

TEST(Abstraction, FromMapKeepsLabels) {
    const auto phi = Abstraction::from_map({2, 0, 1, 2});
    EXPECT_EQ(phi.n_abstract(), 3);
    EXPECT_EQ(phi(0), 2);
}

TEST(Abstraction, CanonicalOrdersBySmallestMember) {
    const std::vector<AbstractIndex> map{2, 0, 2, 1};
    const auto phi = Abstraction::canonical(map);
    EXPECT_EQ(phi.map(), (std::vector<AbstractIndex>{0, 1, 0, 2}));
}

TEST(Abstraction, IdentityAndSingleBlock) {
    EXPECT_EQ(Abstraction::identity(3).map(), (std::vector<AbstractIndex>{0, 1, 2}));
    EXPECT_EQ(Abstraction::single_block(3).n_abstract(), 1);
}

TEST(Similarity, FixtureErrors) {
    const auto [m, phi] = counterexample_fixture();
    const auto e = measure_similarity(m, phi);
    EXPECT_NEAR(e.eta_t, 0.2, 1e-15);
    EXPECT_EQ(e.eta_r, 0.0);
}

TEST(Weighting, UniformOnFixture) {
    const auto [m, phi] = counterexample_fixture();
    const auto bar = build_abstract_mdp(m, phi, WeightingFn::uniform(phi, 1));
    EXPECT_NEAR(bar.T(0, 0, 1), 0.5, 1e-15);
    EXPECT_NEAR(bar.T(0, 0, 2), 0.5, 1e-15);
    EXPECT_NEAR(bar.T(1, 0, 0), 1.0, 1e-15);
    EXPECT_TRUE(validate_mdp(bar).ok());
}

TEST(Weighting, IndicatorPicksPrototype) {
    const auto [m, phi] = counterexample_fixture();
    const std::vector<StateIndex> proto{1, 2, 3};
    const auto w = WeightingFn::indicator(phi, 1, proto);
    const auto bar = build_abstract_mdp(m, phi, w);
    EXPECT_NEAR(bar.T(0, 0, 1), 0.4, 1e-15);
}

TEST(Weighting, InvalidWeightsNamePair) {
    const auto [m, phi] = counterexample_fixture();
    WeightingFn w(4, 1, {0.7, 0.7, 1.0, 1.0});
    EXPECT_FALSE(validate_weighting(w, phi).ok());
    try {
        (void)build_abstract_mdp(m, phi, w);
        FAIL() << "expected ContractViolation";
    } catch (const ContractViolation& e) {
        EXPECT_NE(std::string(e.what()).find("(0, 0)"), std::string::npos) << e.what();
    }
}

TEST(Weighting, OutsideDomainThrows) {
    const auto [m, phi] = counterexample_fixture();
    auto w = WeightingFn::uniform(phi, 1);
    w.restrict_domain({true, false, true}, 3);
    EXPECT_NO_THROW((void)w.at(phi, 0, 0));
    EXPECT_THROW((void)w.at(phi, 2, 0), DomainError);
    EXPECT_THROW((void)w(9, 0), InvalidArgument);
    // Out-of-domain pairs become zero-reward self-loops.
    const auto bar = build_abstract_mdp(m, phi, w);
    EXPECT_EQ(bar.T(1, 0, 1), 1.0);
    EXPECT_EQ(bar.R(1, 0), 0.0);
}

TEST(Weighting, IdentityAbstractionIsIdentity) {
    prop::for_seeds(10, [](std::uint64_t seed) {
        const auto m = oracle::dense_random_mdp(5, 2, seed);
        const auto phi = Abstraction::identity(5);
        const auto bar = build_abstract_mdp(m, phi, WeightingFn::uniform(phi, 2));
        EXPECT_EQ(bar.transition, m.transition);
        EXPECT_EQ(bar.reward, m.reward);
    });
}

TEST(Weighting, MatchesDefinition) {
    prop::for_seeds(20, [](std::uint64_t seed) {
        const auto m = oracle::dense_random_mdp(6, 2, seed);
        const auto phi = oracle::random_abstraction(6, 3, seed);
        const auto w = WeightingFn::uniform(phi, 2);
        const auto bar = build_abstract_mdp(m, phi, w);
        const auto ref = oracle::abstract_by_definition(m, phi, w);
        const auto d = model_distance(bar, ref);
        EXPECT_LE(d.eta_t, 1e-15);
        EXPECT_LE(d.eta_r, 1e-15);
    });
}

TEST(Similarity, PremiseErrorsBoundedBySimilarity) {
    // A convex combination of block members is never farther from a member
    // than the widest spread inside the block.
    prop::for_seeds(30, [](std::uint64_t seed) {
        const auto m = oracle::dense_random_mdp(7, 2, seed);
        const auto phi = oracle::random_abstraction(7, 3, seed);
        const auto sim = measure_similarity(m, phi);
        const auto prem = premise_errors(m, phi, build_abstract_mdp(m, phi, WeightingFn::uniform(phi, 2)));
        EXPECT_LE(prem.eta_t, sim.eta_t + 1e-15);
        EXPECT_LE(prem.eta_r, sim.eta_r + 1e-15);
    });
}

TEST(Distance, L1AndModelDistance) {
    const std::vector<double> p{0.5, 0.5, 0.0};
    const std::vector<double> q{0.25, 0.25, 0.5};
    EXPECT_DOUBLE_EQ(l1_distance(p, q), 1.0);
    const auto m = oracle::dense_random_mdp(3, 1, 4);
    auto n = m;
    n.R(1, 0) += 0.1;
    const auto d = model_distance(m, n);
    EXPECT_NEAR(d.eta_r, 0.1, 1e-15);
    EXPECT_EQ(d.eta_t, 0.0);
}

TEST(Benchmark, MeetsTargetsAndIsDeterministic) {
    prop::for_seeds(20, [](std::uint64_t seed) {
        BenchmarkSpec spec{3, {2, 3, 1}, 2, 0.1, 0.05, 1.0, seed};
        const auto [m, phi] = generate_benchmark(spec);
        EXPECT_TRUE(validate_mdp(m).ok());
        EXPECT_EQ(phi.map(), (std::vector<AbstractIndex>{0, 0, 1, 1, 1, 2}));
        const auto e = measure_similarity(m, phi);
        EXPECT_LE(e.eta_t, 0.1);
        EXPECT_LE(e.eta_r, 0.05);
        const auto again = generate_benchmark(spec);
        EXPECT_EQ(again.first.transition, m.transition);
    });
}

TEST(Benchmark, ZeroTargetsGiveExactAbstraction) {
    const auto [m, phi] = generate_benchmark({4, {3, 3, 3, 3}, 2, 0.0, 0.0, 1.0, 17});
    const auto e = measure_similarity(m, phi);
    EXPECT_EQ(e.eta_t, 0.0);
    EXPECT_EQ(e.eta_r, 0.0);
}

TEST(Benchmark, RejectsBadSpecs) {
    EXPECT_THROW(generate_benchmark({2, {1}, 1, 0.0, 0.0, 1.0, 0}), InvalidArgument);
    EXPECT_THROW(generate_benchmark({2, {1, 0}, 1, 0.0, 0.0, 1.0, 0}), InvalidArgument);
    EXPECT_THROW(generate_benchmark({1, {1}, 1, 2.5, 0.0, 1.0, 0}), InvalidArgument);
}

TEST(Perturb, StaysWithinCapAndNormalized) {
    prop::for_seeds(200, [](std::uint64_t seed) {
        CounterRng rng(seed);
        const std::vector<double> row{0.1, 0.0, 0.6, 0.3};
        const double cap = 0.3 * rng.uniform();
        const auto out = perturb_row(row, cap, rng);
        double total = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            EXPECT_GE(out[i], 0.0);
            EXPECT_LE(std::abs(out[i] - row[i]), cap + 1e-15);
            total += out[i];
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    });
}

TEST(Perturb, ZeroCapIsExactCopy) {
    CounterRng rng(1);
    const std::vector<double> row{0.2, 0.8};
    EXPECT_EQ(perturb_row(row, 0.0, rng), row);
}

}  // namespace
}  // namespace rlao

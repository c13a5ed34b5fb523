#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <sstream>

#include "rlao/errors.hpp"
#include "rlao/experiments.hpp"

namespace rlao {
namespace {

const SuiteRow* find_row(const SuiteReport& r, const std::string& id) {
    for (const auto& row : r.rows) {
        if (row.case_id == id) return &row;
    }
    return nullptr;
}

std::string csv(const SuiteReport& r) {
    std::ostringstream out;
    write_suite_csv(out, r);
    return out.str();
}

ExperimentConfig base(SuiteKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    c.seed = 3;
    c.trials = 200;
    return c;
}

TEST(Fixture, Shape) {
    const auto [m, phi] = counterexample_fixture();
    EXPECT_EQ(m.n_states, 4);
    EXPECT_EQ(m.n_actions, 1);
    EXPECT_EQ(m.start_state, 0);
    EXPECT_EQ(phi.map(), (std::vector<AbstractIndex>{0, 0, 1, 2}));
}

TEST(SuiteKind, NamesRoundTrip) {
    for (auto k : {SuiteKind::counterexample, SuiteKind::concentration, SuiteKind::value_bounds, SuiteKind::martingale,
                   SuiteKind::simulator_sampling, SuiteKind::rmax_compare}) {
        EXPECT_EQ(suite_kind_from_string(to_string(k)), k);
    }
    EXPECT_THROW(suite_kind_from_string("bogus"), ConfigError);
}

TEST(Counterexample, FixtureRows) {
    const auto r = run_counterexample_suite(base(SuiteKind::counterexample));
    EXPECT_TRUE(r.passed());
    const auto* second = find_row(r, "pr_second_B");
    ASSERT_NE(second, nullptr);
    EXPECT_NEAR(second->measured, 0.52, 1e-12);
    const auto* dep = find_row(r, "dependent_B_B");
    ASSERT_NE(dep, nullptr);
    EXPECT_TRUE(dep->pass);
    EXPECT_NEAR(dep->measured, 0.048, 1e-12);
}

TEST(Concentration, OnlineSmallRunPasses) {
    auto c = base(SuiteKind::concentration);
    c.concentration.sample_sizes = {20};
    c.concentration.eps = {0.5, 2.0};
    const auto r = run_concentration_suite(c, 2);
    EXPECT_TRUE(r.passed());
    // L1 distances never exceed 2.
    const auto* wide = find_row(r, "N20_eps2");
    ASSERT_NE(wide, nullptr);
    EXPECT_EQ(wide->measured, 0.0);
}

TEST(Concentration, EverySamplerPassesAndIsWorkerIndependent) {
    for (auto sampler : {SamplerKind::online, SamplerKind::simulator, SamplerKind::independent}) {
        auto c = base(SuiteKind::concentration);
        c.concentration.sampler = sampler;
        c.concentration.sample_sizes = {10, 40};
        c.concentration.eps = {0.5, 0.9};
        const auto one = run_concentration_suite(c, 1);
        const auto four = run_concentration_suite(c, 4);
        EXPECT_TRUE(one.passed());
        EXPECT_EQ(csv(one), csv(four));
    }
}

TEST(ValueBounds, SmallRunPassesDeterministically) {
    auto c = base(SuiteKind::value_bounds);
    c.value_bounds.count = 40;
    c.value_bounds.max_states = 6;
    const auto a = run_value_bound_suite(c, 1);
    const auto b = run_value_bound_suite(c, 3);
    EXPECT_TRUE(a.passed());
    EXPECT_EQ(csv(a), csv(b));
    EXPECT_GT(a.gating_rows(), 0u);
}

TEST(Martingale, SmallRunPasses) {
    auto c = base(SuiteKind::martingale);
    c.martingale.random_instances = 6;
    const auto r = run_martingale_suite(c, 2);
    EXPECT_TRUE(r.passed());
    EXPECT_GE(r.rows.size(), 14u);
}

TEST(Simulator, SmallRunPasses) {
    auto c = base(SuiteKind::simulator_sampling);
    const auto r = run_simulator_suite(c, 2);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(csv(r), csv(run_simulator_suite(c, 1)));
}

ExperimentConfig rmax_inline(const GroundMDP& m, const Abstraction& phi) {
    auto c = base(SuiteKind::rmax_compare);
    c.instance.type = InstanceSpec::Type::inline_model;
    c.instance.mdp = m;
    c.instance.abstraction = phi;
    c.rmax.seeds = 2;
    c.rmax.min_return_passes = 0;
    c.rmax.min_speed_passes = 0;
    c.rmax.run.m_known = 2;
    return c;
}

TEST(RMaxCompare, RejectsNonErgodicInstance) {
    // State 1 is absorbing.
    GroundMDP m(2, 1, 1.0);
    m.row(0, 0)[1] = 1.0;
    m.row(1, 0)[1] = 1.0;
    m.start_state = 0;
    EXPECT_THROW(run_rmax_compare(rmax_inline(m, Abstraction::identity(2)), 1), PreconditionError);
    EXPECT_FALSE(is_ergodic_under_uniform(m));
}

TEST(RMaxCompare, SingleStateInstance) {
    GroundMDP m(1, 1, 1.0);
    m.row(0, 0)[0] = 1.0;
    m.R(0, 0) = 0.75;
    m.start_state = 0;
    const auto r = run_rmax_compare(rmax_inline(m, Abstraction::identity(1)), 1);
    EXPECT_TRUE(r.passed());
    const auto* speed = find_row(r, "speed_passes");
    ASSERT_NE(speed, nullptr);
    // Same abstraction as the baseline: never strictly faster.
    EXPECT_EQ(speed->measured, 0.0);
    const auto* returns = find_row(r, "return_passes");
    ASSERT_NE(returns, nullptr);
    EXPECT_EQ(returns->measured, 2.0);
}

TEST(RMaxCompare, UnmetThresholdFails) {
    GroundMDP m(1, 1, 1.0);
    m.row(0, 0)[0] = 1.0;
    m.start_state = 0;
    auto c = rmax_inline(m, Abstraction::identity(1));
    c.rmax.min_speed_passes = 1;
    const auto r = run_rmax_compare(c, 1);
    EXPECT_FALSE(r.passed());
    EXPECT_EQ(r.failures(), 1u);
}

TEST(Dispatch, RunSuiteMatchesDirectCall) {
    const auto c = base(SuiteKind::counterexample);
    EXPECT_EQ(csv(run_suite(c, 1)), csv(run_counterexample_suite(c)));
}

TEST(Report, CsvAndSummary) {
    SuiteReport r;
    r.kind = SuiteKind::martingale;
    r.rows.push_back({"a", "x=1", 0.5, 1.0, 1.0, true, true});
    r.rows.push_back({"b", "", 2.0, 1.0, 1.0, false, true});
    r.rows.push_back({"c", "", 9.0, 1.0, 1.0, false, false});
    EXPECT_EQ(r.gating_rows(), 2u);
    EXPECT_EQ(r.failures(), 1u);
    EXPECT_DOUBLE_EQ(r.failure_fraction(), 0.5);
    EXPECT_FALSE(r.passed());
    const auto text = csv(r);
    EXPECT_EQ(text.rfind("schema_version,suite,case_id,inputs,measured,bound,threshold,pass,gating\n", 0), 0u);
    EXPECT_NE(text.find("1,martingale,a,x=1,0.5,1,1,1,1\n"), std::string::npos);
    std::ostringstream summary;
    write_suite_summary(summary, r);
    EXPECT_NE(summary.str().find("result=FAIL"), std::string::npos);
}

TEST(ParallelFor, CoversRangeAndRethrowsFirst) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 7 || i == 30) throw std::runtime_error("at " + std::to_string(i));
        });
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "at 7");
    }
    parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(Environment, Overrides) {
    ::setenv("RLAO_WORKERS", "3", 1);
    EXPECT_EQ(default_workers(), 3);
    ::setenv("RLAO_WORKERS", "zero", 1);
    EXPECT_GE(default_workers(), 1);
    ::unsetenv("RLAO_WORKERS");

    ::setenv("RLAO_OUTPUT_DIR", "/tmp/out", 1);
    EXPECT_EQ(resolve_output_path("a.csv"), "/tmp/out/a.csv");
    EXPECT_EQ(resolve_output_path("/abs/a.csv"), "/abs/a.csv");
    ::unsetenv("RLAO_OUTPUT_DIR");
    EXPECT_EQ(resolve_output_path("a.csv"), "a.csv");
}

TEST(RandomMdp, ValidAndDeterministic) {
    const auto a = random_mdp(5, 2, 1.0, 42);
    const auto b = random_mdp(5, 2, 1.0, 42);
    EXPECT_TRUE(validate_mdp(a).ok());
    EXPECT_EQ(a.transition, b.transition);
    EXPECT_NE(a.transition, random_mdp(5, 2, 1.0, 43).transition);
}

}  // namespace
}  // namespace rlao

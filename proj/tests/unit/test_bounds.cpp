#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rlao/bounds.hpp"
#include "rlao/errors.hpp"

namespace rlao {
namespace {

// Closed forms written out independently of the library.
double martingale_form(int n, double m, double eps) { return std::pow(2.0, n) * std::exp(-m * eps * eps / 8.0); }
double iid_form(int n, double m, double eps) { return (std::pow(2.0, n) - 2.0) * std::exp(-m * eps * eps / 2.0); }

TEST(Concentration, OracleValues) {
    EXPECT_NEAR(weissman_bound(2, 8, 1.0).raw, 0.036631277777468, 1e-14);
    EXPECT_NEAR(noniid_l1_bound(3, 100, 0.5).raw, 2.235991903247e-5, 1e-16);
    EXPECT_NEAR(abstract_l1_bound(3, 800, 0.5).raw, 1.111035509197e-10, 1e-21);
}

TEST(Concentration, ClampsToProbability) {
    const auto r = weissman_bound(3, 1, 0.1);
    EXPECT_GT(r.raw, 1.0);
    EXPECT_EQ(r.clamped, 1.0);
    EXPECT_TRUE(r.probability);
    EXPECT_EQ(abstract_l1_bound(2, 0, 0.5).clamped, 1.0);
}

TEST(Concentration, RejectsBadInputs) {
    EXPECT_THROW(weissman_bound(2, 10, 0.0), InvalidArgument);
    EXPECT_THROW(abstract_l1_bound(0, 10, 0.5), InvalidArgument);
    EXPECT_THROW(noniid_l1_bound(2, -1, 0.5), InvalidArgument);
}

TEST(Concentration, ReportCarriesInputs) {
    const auto r = abstract_l1_bound(3, 800, 0.5);
    EXPECT_EQ(r.name, "abstract_l1");
    ASSERT_EQ(r.inputs.size(), 3u);
    EXPECT_EQ(r.inputs[1].first, "n");
    EXPECT_EQ(r.inputs[1].second, 800.0);
}

TEST(Hoeffding, TailAndUnion) {
    EXPECT_DOUBLE_EQ(hoeffding_tail(10, 0.1), std::exp(-0.2));
    EXPECT_DOUBLE_EQ(hoeffding_tail(10, 0.2, 2.0), std::exp(-0.2));
    const std::vector<double> small{0.3, 0.5};
    const std::vector<double> big{0.7, 0.6};
    EXPECT_DOUBLE_EQ(union_bound(small), 0.8);
    EXPECT_EQ(union_bound(big), 1.0);
}

TEST(SampleCount, OracleValuesPassAndPredecessorFails) {
    EXPECT_EQ(samples_needed(2, 0.1, 0.5, SampleVariant::martingale), 119);
    EXPECT_LE(martingale_form(2, 119, 0.5), 0.1);
    EXPECT_GT(martingale_form(2, 118, 0.5), 0.1);
    EXPECT_TRUE(sample_count_suffices(119, 2, 0.1, 0.5, SampleVariant::martingale));
    EXPECT_FALSE(sample_count_suffices(118, 2, 0.1, 0.5, SampleVariant::martingale));

    EXPECT_EQ(samples_needed(2, 0.1, 0.5, SampleVariant::iid_simulator), 24);
    EXPECT_LE(iid_form(2, 24, 0.5), 0.1);
    EXPECT_GT(iid_form(2, 23, 0.5), 0.1);
}

TEST(SampleCount, MatchesLinearScan) {
    for (int n : {1, 2, 3, 5}) {
        for (double kappa : {0.01, 0.1, 0.5}) {
            for (double eps : {0.1, 0.5, 1.5}) {
                SCOPED_TRACE("n=" + std::to_string(n) + " kappa=" + std::to_string(kappa) +
                             " eps=" + std::to_string(eps));
                const auto mart = oracle::first_passing(
                    1'000'000, [&](std::int64_t m) { return martingale_form(n, double(m), eps) <= kappa; });
                const auto iid = oracle::first_passing(
                    1'000'000, [&](std::int64_t m) { return iid_form(n, double(m), eps) <= kappa; });
                EXPECT_EQ(samples_needed(n, kappa, eps, SampleVariant::martingale), mart);
                EXPECT_EQ(samples_needed(n, kappa, eps, SampleVariant::iid_simulator), iid);
            }
        }
    }
}

TEST(SampleCount, RejectsDegenerateConfidence) {
    EXPECT_THROW(samples_needed(2, 0.0, 0.5, SampleVariant::martingale), InvalidArgument);
    EXPECT_THROW(samples_needed(2, 1.0, 0.5, SampleVariant::martingale), InvalidArgument);
    EXPECT_THROW(samples_needed(2, 0.1, 2.0, SampleVariant::martingale), InvalidArgument);
}

TEST(ValueBounds, HandComputed) {
    // 2 * 0.05 + (1 * 2 / 2) * 0.125 * 2 * 1
    EXPECT_NEAR(value_gap_abstraction(0.05, 0.125, 2, 1.0, HorizonSpec::finite(2)), 0.35, 1e-15);
    EXPECT_NEAR(value_loss_bound(0.05, 0.125, 2, 1.0, HorizonSpec::finite(2)), 0.7, 1e-15);
    // Stated form: 2 * (0.1 + (3 * 2 / 2) * 0.125 * 2)
    EXPECT_NEAR(value_loss_bound(0.05, 0.125, 2, 1.0, HorizonSpec::finite(2), LossForm::loose), 1.7, 1e-15);
    // 0.1 / 0.5 + 0.5 * 0.1 * 2 / 0.25
    EXPECT_NEAR(value_gap_abstraction(0.1, 0.1, 2, 1.0, HorizonSpec::discount(0.5)), 0.6, 1e-15);
    EXPECT_NEAR(value_loss_bound(0.1, 0.1, 2, 1.0, HorizonSpec::discount(0.5)), 1.2, 1e-15);
    EXPECT_NEAR(value_loss_bound(0.1, 0.1, 2, 1.0, HorizonSpec::discount(0.5), LossForm::loose), 1.2, 1e-15);
    // 3 * 0.1 + 3 * 0.1 * 3
    EXPECT_NEAR(simulation_lemma_bound(0.1, 0.1, 3, 1.0, 3), 1.2, 1e-15);
    // 2 * 2 * 0.05 + 2 * (0.05 + 0.05) * 2
    EXPECT_NEAR(learned_model_loss(0.05, 0.05, 0.05, 2, 1.0, 2), 0.6, 1e-15);
    // 3 * 0.1 + 3 * 0.1 * 2
    EXPECT_NEAR(g_function(3, 0.1, 0.1, 2, 1.0), 0.9, 1e-15);
    EXPECT_NEAR(rmax_return_target(0.9, 0.6, 3, 0.05), 0.2, 1e-15);
}

TEST(ValueBounds, ExactAbstractionHasNoLoss) {
    for (int h = 1; h <= 5; ++h) {
        EXPECT_EQ(value_loss_bound(0.0, 0.0, 4, 1.0, HorizonSpec::finite(h)), 0.0);
    }
    EXPECT_EQ(value_gap_abstraction(0.0, 0.2, 3, 1.0, HorizonSpec::finite(1)), 0.0);
}

TEST(ValueBounds, StatedFormDominatesProofForm) {
    for (int h = 1; h <= 6; ++h) {
        EXPECT_GE(value_loss_bound(0.1, 0.1, 3, 1.0, HorizonSpec::finite(h), LossForm::loose),
                  value_loss_bound(0.1, 0.1, 3, 1.0, HorizonSpec::finite(h), LossForm::tight));
    }
}

TEST(ValueBounds, RejectsBadHorizon) {
    EXPECT_THROW(value_gap_abstraction(0.1, 0.1, 2, 1.0, HorizonSpec::finite(0)), InvalidArgument);
    EXPECT_THROW(value_gap_abstraction(0.1, 0.1, 2, 1.0, HorizonSpec::discount(1.0)), InvalidArgument);
}

TEST(RMaxConstants, K1) {
    // 32 * 4 * 1 * 1 * (ln 2 - ln 0.05) / 9 = 52.46
    EXPECT_NEAR(rmax_k1_requirement(2, 1, 0.3, 1.0, 2, 1.0), 128.0 * (std::log(2.0) - std::log(0.05)) / 9.0, 1e-12);
    EXPECT_EQ(rmax_k1(2, 1, 0.3, 1.0, 2, 1.0), 53);
}

TEST(RMaxConstants, K1AtUnitHorizonFallsBackToSampleCount) {
    const double kappa = 0.3 / 6.0;
    EXPECT_EQ(rmax_k1(2, 1, 0.3, 1.0, 1, 1.0), samples_needed(2, kappa, 1.0, SampleVariant::martingale));
    EXPECT_GE(rmax_k1(1, 1, 0.9, 1.0, 1, 1.0), 1);
}

TEST(RMaxConstants, K2SmallestSatisfying) {
    EXPECT_EQ(rmax_k2(53, 2, 1, 1.0, 1.0, 0.3), 436);
    EXPECT_TRUE(rmax_k2_satisfied(436, 53, 2, 1, 1.0, 1.0, 0.3));
    EXPECT_FALSE(rmax_k2_satisfied(435, 53, 2, 1, 1.0, 1.0, 0.3));
    // Direct substitution of the two conditions.
    auto ok = [](double k) {
        return (3.0 / 8.0) * k - std::cbrt(k * k) >= 53.0 * 2.0 && std::exp(-2.0 * std::cbrt(k)) <= 0.1;
    };
    EXPECT_TRUE(ok(436));
    EXPECT_FALSE(ok(435));
}

TEST(RMaxConstants, K3) {
    EXPECT_EQ(rmax_k3(2, 2, 1.0, 1.0, 0.3), 8);
    EXPECT_TRUE(rmax_k3_satisfied(8, 1.0, 1.0, 0.3));
    EXPECT_FALSE(rmax_k3_satisfied(4, 1.0, 1.0, 0.3));
}

TEST(Csv, StableColumns) {
    std::ostringstream out;
    write_bound_csv_header(out);
    write_bound_csv_row(out, weissman_bound(2, 8, 1.0));
    EXPECT_EQ(out.str(), "name,inputs,raw,clamped\nweissman,n_support=2;n=8;eps=1," + format_double(weissman_bound(2, 8, 1.0).raw) +
                             "," + format_double(weissman_bound(2, 8, 1.0).clamped) + "\n");
}

TEST(Csv, FormatRoundTrips) {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125}) {
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
    EXPECT_EQ(format_double(0.36), "0.36");
}

}  // namespace
}  // namespace rlao

#include <gtest/gtest.h>

#include <filesystem>

#include "oracles.hpp"
#include "property.hpp"
#include "rlao/errors.hpp"
#include "rlao/experiments.hpp"
#include "rlao/serialization.hpp"

namespace rlao {
namespace {

TEST(ModelJson, MdpRoundTrip) {
    prop::for_seeds(10, [](std::uint64_t seed) {
        auto m = oracle::dense_random_mdp(4, 3, seed);
        const auto back = mdp_from_json(mdp_to_json(m));
        EXPECT_EQ(back.n_states, 4);
        EXPECT_EQ(back.n_actions, 3);
        EXPECT_EQ(back.transition, m.transition);
        EXPECT_EQ(back.reward, m.reward);
        EXPECT_EQ(back.start_state, m.start_state);
    });
}

TEST(ModelJson, AbstractionAndWeightingRoundTrip) {
    const Abstraction phi({0, 1, 0, 2}, 3);
    EXPECT_EQ(abstraction_from_json(abstraction_to_json(phi, 2)).map(), phi.map());
    const auto w = WeightingFn::uniform(phi, 2);
    EXPECT_EQ(weighting_from_json(weighting_to_json(w)).weights(), w.weights());
}

TEST(ModelJson, RejectsMalformed) {
    EXPECT_THROW(mdp_from_json("not json"), ConfigError);
    EXPECT_THROW(mdp_from_json(R"({"n_states":1,"n_actions":1,"r_max":1,"reward":[0],"transition":[0.5]})"),
                 ConfigError);
    EXPECT_THROW(mdp_from_json(R"({"n_states":1,"n_actions":1,"r_max":1,"reward":[0],"transition":[1,0]})"),
                 ConfigError);
    EXPECT_THROW(
        mdp_from_json(R"({"n_states":1,"n_actions":1,"r_max":1,"reward":[0],"transition":[1],"colour":1})"),
        ConfigError);
    EXPECT_THROW(
        mdp_from_json(R"({"n_states":1,"n_actions":1,"r_max":1,"reward":[0],"transition":[1],"start_state":3})"),
        ConfigError);
    EXPECT_NO_THROW(mdp_from_json(R"({"n_states":1,"n_actions":1,"r_max":1,"reward":[0],"transition":[1]})"));
    EXPECT_THROW(abstraction_from_json(R"({"map":[0,0],"n_abstract":2})"), ConfigError);
    EXPECT_THROW(abstraction_from_json(R"({"map":"0,1","n_abstract":2})"), ConfigError);
}

TEST(Config, MinimalUsesDefaults) {
    const auto cfg = parse_config(R"({"schema_version":1,"kind":"martingale"})");
    EXPECT_EQ(cfg.kind, SuiteKind::martingale);
    EXPECT_EQ(cfg.martingale, MartingaleSection{});
    EXPECT_EQ(cfg.instance.type, InstanceSpec::Type::fixture);
}

TEST(Config, RejectsSchemaAndKindErrors) {
    EXPECT_THROW(parse_config(R"({"kind":"martingale"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":2,"kind":"martingale"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"nope"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"martingale","extra":0})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"martingale","rmax":{}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"martingale","trials":"many"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"martingale","martingale":{"depht":2}})"),
                 ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"concentration","concentration":{"sampler":"x"}})"),
                 ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"counterexample",
                                  "instance":{"type":"fixture","name":"other"}})"),
                 ConfigError);
}

TEST(Config, RejectsOutOfRangeValues) {
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"rmax_compare","rmax":{"delta":1.5}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"rmax_compare","rmax":{"m_known":0}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"martingale","trials":0})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version":1,"kind":"counterexample",
                                  "instance":{"type":"generator","n_abstract":2,"block_sizes":[1],
                                              "n_actions":1,"target_eta_t":0,"target_eta_r":0}})"),
                 ConfigError);
}

ExperimentConfig sample_config(SuiteKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    c.seed = 77;
    c.trials = 123;
    c.tolerance_se = 2.5;
    c.output = "x.csv";
    c.concentration.sampler = SamplerKind::independent;
    c.concentration.eps = {0.25};
    c.value_bounds.horizons = {2, 5};
    c.martingale.depth = 4;
    c.simulator.prototype = PrototypeRule::random_member;
    c.rmax.run.m_known = 7;
    c.rmax.seeds = 3;
    c.rmax.min_return_passes = 2;
    c.rmax.min_speed_passes = 2;
    return c;
}

// Serialization keeps only the section of the configured kind.
ExperimentConfig own_section_only(ExperimentConfig c) {
    if (c.kind != SuiteKind::concentration) c.concentration = {};
    if (c.kind != SuiteKind::value_bounds) c.value_bounds = {};
    if (c.kind != SuiteKind::martingale) c.martingale = {};
    if (c.kind != SuiteKind::simulator_sampling) c.simulator = {};
    if (c.kind != SuiteKind::rmax_compare) c.rmax = {};
    return c;
}

TEST(Config, RoundTripEveryKind) {
    for (auto kind : {SuiteKind::counterexample, SuiteKind::concentration, SuiteKind::value_bounds,
                      SuiteKind::martingale, SuiteKind::simulator_sampling, SuiteKind::rmax_compare}) {
        SCOPED_TRACE(std::string(to_string(kind)));
        auto c = sample_config(kind);
        const auto back = parse_config(serialize_config(c));
        EXPECT_TRUE(back == own_section_only(c));
        EXPECT_EQ(serialize_config(back), serialize_config(c));
    }
}

TEST(Config, InlineAndGeneratorInstancesRoundTrip) {
    auto c = own_section_only(sample_config(SuiteKind::counterexample));
    c.instance.type = InstanceSpec::Type::inline_model;
    std::tie(c.instance.mdp, c.instance.abstraction) = counterexample_fixture();
    EXPECT_TRUE(parse_config(serialize_config(c)) == c);

    c.instance = {};
    c.instance.type = InstanceSpec::Type::generator;
    c.instance.generator = {2, {2, 1}, 2, 0.1, 0.0, 1.0, 5};
    EXPECT_TRUE(parse_config(serialize_config(c)) == c);
    const auto [m, phi] = materialize(c.instance);
    EXPECT_EQ(m.n_states, 3);
    EXPECT_EQ(phi.n_abstract(), 2);
}

TEST(Config, ShippedTemplatesParse) {
    const std::filesystem::path dir = std::filesystem::path(RLAO_SOURCE_DIR) / "configs";
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        SCOPED_TRACE(entry.path().string());
        const auto cfg = load_config(entry.path().string());
        EXPECT_EQ(cfg.schema_version, kSchemaVersion);
        EXPECT_FALSE(cfg.output.empty());
        EXPECT_NO_THROW(materialize(cfg.instance));
        ++seen;
    }
    EXPECT_GE(seen, 6);
}

TEST(Config, MissingFileIsConfigError) {
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

}  // namespace
}  // namespace rlao

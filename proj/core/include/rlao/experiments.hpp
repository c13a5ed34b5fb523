#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rlao/abstraction.hpp"
#include "rlao/dependence.hpp"
#include "rlao/mdp.hpp"
#include "rlao/rmax.hpp"

namespace rlao {

inline constexpr int kSchemaVersion = 1;

/// The 4-state, 1-action instance whose two visits to block A give
/// dependent outcomes. Blocks A = {0, 1}, B = {2}, C = {3}; start 0.
std::pair<GroundMDP, Abstraction> counterexample_fixture();

enum class SuiteKind { counterexample, concentration, value_bounds, martingale, simulator_sampling, rmax_compare };

std::string_view to_string(SuiteKind kind);
/// Throws ConfigError for unknown names.
SuiteKind suite_kind_from_string(std::string_view name);

struct InstanceSpec {
    enum class Type { fixture, inline_model, generator };
    Type type = Type::fixture;
    std::string fixture = "counterexample";
    GroundMDP mdp;            // inline_model
    Abstraction abstraction;  // inline_model
    BenchmarkSpec generator;  // generator

    friend bool operator==(const InstanceSpec&, const InstanceSpec&);
};

/// Resolves an instance spec to a concrete (MDP, abstraction) pair.
std::pair<GroundMDP, Abstraction> materialize(const InstanceSpec& spec);

enum class SamplerKind { online, simulator, independent };

struct ConcentrationSection {
    SamplerKind sampler = SamplerKind::online;
    std::vector<int> sample_sizes{50, 100, 200};
    std::vector<double> eps{0.3, 0.5, 0.8};
    TargetPair target{0, 0};
    std::int64_t step_cap = 1'000'000;

    friend bool operator==(const ConcentrationSection&, const ConcentrationSection&) = default;
};

struct ValueBoundsSection {
    int count = 1000;
    int max_states = 10;
    int max_abstract = 4;
    int max_actions = 3;
    std::vector<int> horizons{1, 2, 3, 4};
    std::vector<double> gammas{0.9, 0.95};
    double max_eta_t = 0.3;
    double max_eta_r = 0.3;
    double model_eps = 0.05;
    int exact_every = 10;  // every k-th instance has eta = 0
    double slack = 1e-9;

    friend bool operator==(const ValueBoundsSection&, const ValueBoundsSection&) = default;
};

struct MartingaleSection {
    int depth = 3;
    int random_instances = 100;
    int random_states = 3;
    int random_blocks = 2;
    int random_actions = 2;
    double tolerance = 1e-10;

    friend bool operator==(const MartingaleSection&, const MartingaleSection&) = default;
};

struct SimulatorSection {
    std::vector<double> delta{0.1, 0.3};
    std::vector<double> eps{0.5, 0.8};
    PrototypeRule prototype = PrototypeRule::lowest_index;

    friend bool operator==(const SimulatorSection&, const SimulatorSection&) = default;
};

struct RMaxSection {
    RMaxConfig run;  // seed is the base seed; run k uses seed + k
    int seeds = 20;
    int min_return_passes = 18;
    int min_speed_passes = 18;

    friend bool operator==(const RMaxSection&, const RMaxSection&) = default;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    SuiteKind kind = SuiteKind::counterexample;
    std::uint64_t seed = 0;
    int trials = 1000;
    double tolerance_se = 3.0;
    bool expose_ground = false;
    std::string output;  // CSV path; empty means no file
    InstanceSpec instance;
    ConcentrationSection concentration;
    ValueBoundsSection value_bounds;
    MartingaleSection martingale;
    SimulatorSection simulator;
    RMaxSection rmax;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&);
};

/// Strict parse: unknown keys, sections for another kind, and type errors
/// throw ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
/// Writes only the section belonging to the configured kind.
std::string serialize_config(const ExperimentConfig& cfg, int indent = 2);

struct SuiteRow {
    std::string case_id;
    std::string inputs;  // "k=v;k=v"
    double measured = 0.0;
    double bound = 0.0;
    double threshold = 0.0;  // value `measured` is compared against
    bool pass = true;
    bool gating = true;      // informational rows do not decide the suite
};

struct SuiteReport {
    SuiteKind kind = SuiteKind::counterexample;
    std::vector<SuiteRow> rows;
    std::string pass_rule;
    double runtime_seconds = 0.0;
    std::vector<std::string> notes;  // e.g. discarded trials

    [[nodiscard]] std::size_t gating_rows() const;
    [[nodiscard]] std::size_t failures() const;
    [[nodiscard]] double failure_fraction() const;
    [[nodiscard]] bool passed() const { return failures() == 0; }
};

/// Deterministic CSV (no timing columns).
void write_suite_csv(std::ostream& out, const SuiteReport& report);
/// One-line summary including runtime.
void write_suite_summary(std::ostream& out, const SuiteReport& report);

/// Worker count from RLAO_WORKERS, else hardware concurrency.
int default_workers();
/// Output path with RLAO_OUTPUT_DIR applied to relative paths.
std::string resolve_output_path(const std::string& path);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
/// rethrown on the caller's thread (first by index).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

SuiteReport run_counterexample_suite(const ExperimentConfig& cfg);
SuiteReport run_concentration_suite(const ExperimentConfig& cfg, int workers = 0);
SuiteReport run_value_bound_suite(const ExperimentConfig& cfg, int workers = 0);
SuiteReport run_martingale_suite(const ExperimentConfig& cfg, int workers = 0);
SuiteReport run_simulator_suite(const ExperimentConfig& cfg, int workers = 0);
SuiteReport run_rmax_compare(const ExperimentConfig& cfg, int workers = 0);

/// Dispatches on cfg.kind. workers = 0 selects default_workers().
SuiteReport run_suite(const ExperimentConfig& cfg, int workers = 0);

/// True when every state is reachable from every state under the uniform
/// random policy.
bool is_ergodic_under_uniform(const TabularModel& m);

/// Random MDP with `n_states` states whose rows have random supports.
GroundMDP random_mdp(int n_states, int n_actions, double r_max, std::uint64_t seed);

}  // namespace rlao

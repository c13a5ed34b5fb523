#include "rlao/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <ostream>
#include <thread>

#include "rlao/bounds.hpp"
#include "rlao/errors.hpp"
#include "rlao/rng.hpp"

namespace rlao {

std::pair<GroundMDP, Abstraction> counterexample_fixture() {
    GroundMDP m(4, 1, 1.0);
    m.row(0, 0)[2] = 0.6;
    m.row(0, 0)[3] = 0.4;
    m.row(1, 0)[2] = 0.4;
    m.row(1, 0)[3] = 0.6;
    m.row(2, 0)[0] = 1.0;
    m.row(3, 0)[1] = 1.0;
    m.start_state = 0;
    return {std::move(m), Abstraction({0, 0, 1, 2}, 3)};
}

namespace {
constexpr std::pair<SuiteKind, std::string_view> kKindNames[] = {
    {SuiteKind::counterexample, "counterexample"},
    {SuiteKind::concentration, "concentration"},
    {SuiteKind::value_bounds, "value_bounds"},
    {SuiteKind::martingale, "martingale"},
    {SuiteKind::simulator_sampling, "simulator_sampling"},
    {SuiteKind::rmax_compare, "rmax_compare"},
};
}  // namespace

std::string_view to_string(SuiteKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

SuiteKind suite_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    throw ConfigError("unknown suite kind '" + std::string(name) + "'");
}

std::pair<GroundMDP, Abstraction> materialize(const InstanceSpec& spec) {
    switch (spec.type) {
        case InstanceSpec::Type::fixture:
            if (spec.fixture == "counterexample") return counterexample_fixture();
            throw ConfigError("unknown fixture '" + spec.fixture + "'");
        case InstanceSpec::Type::inline_model:
            return {spec.mdp, spec.abstraction};
        case InstanceSpec::Type::generator:
            return generate_benchmark(spec.generator);
    }
    throw ConfigError("bad instance type");
}

std::size_t SuiteReport::gating_rows() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SuiteRow& r) { return r.gating; }));
}

std::size_t SuiteReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const SuiteRow& r) { return r.gating && !r.pass; }));
}

double SuiteReport::failure_fraction() const {
    const auto n = gating_rows();
    return n == 0 ? 0.0 : static_cast<double>(failures()) / static_cast<double>(n);
}

void write_suite_csv(std::ostream& out, const SuiteReport& report) {
    out << "schema_version,suite,case_id,inputs,measured,bound,threshold,pass,gating\n";
    for (const auto& r : report.rows) {
        out << kSchemaVersion << ',' << to_string(report.kind) << ',' << r.case_id << ',' << r.inputs << ','
            << format_double(r.measured) << ',' << format_double(r.bound) << ',' << format_double(r.threshold) << ','
            << (r.pass ? 1 : 0) << ',' << (r.gating ? 1 : 0) << '\n';
    }
}

void write_suite_summary(std::ostream& out, const SuiteReport& report) {
    const double f = report.failure_fraction();
    const auto n = report.gating_rows();
    const double se = n == 0 ? 0.0 : std::sqrt(f * (1.0 - f) / static_cast<double>(n));
    char runtime[32];
    std::snprintf(runtime, sizeof runtime, "%.3f", report.runtime_seconds);
    out << "suite=" << to_string(report.kind) << " result=" << (report.passed() ? "PASS" : "FAIL")
        << " rows=" << report.rows.size() << " gating=" << n << " failures=" << report.failures()
        << " failure_fraction=" << format_double(f) << " se=" << format_double(se) << " runtime_s=" << runtime
        << "\n  pass_rule: " << report.pass_rule << '\n';
    for (const auto& note : report.notes) out << "  note: " << note << '\n';
}

int default_workers() {
    if (const char* env = std::getenv("RLAO_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 1024));
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

std::string resolve_output_path(const std::string& path) {
    if (path.empty()) return path;
    const char* dir = std::getenv("RLAO_OUTPUT_DIR");
    const std::filesystem::path p(path);
    if (dir == nullptr || *dir == '\0' || p.is_absolute()) return path;
    return (std::filesystem::path(dir) / p).string();
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load(std::memory_order_relaxed)) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t count = std::min(threads, n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

SuiteReport run_suite(const ExperimentConfig& cfg, int workers) {
    if (workers <= 0) workers = default_workers();
    switch (cfg.kind) {
        case SuiteKind::counterexample: return run_counterexample_suite(cfg);
        case SuiteKind::concentration: return run_concentration_suite(cfg, workers);
        case SuiteKind::value_bounds: return run_value_bound_suite(cfg, workers);
        case SuiteKind::martingale: return run_martingale_suite(cfg, workers);
        case SuiteKind::simulator_sampling: return run_simulator_suite(cfg, workers);
        case SuiteKind::rmax_compare: return run_rmax_compare(cfg, workers);
    }
    throw ConfigError("bad suite kind");
}

bool is_ergodic_under_uniform(const TabularModel& m) {
    const auto n = static_cast<std::size_t>(m.n_states);
    // Support of I + P, squared until it covers paths of length n - 1.
    std::vector<char> reach(n * n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        reach[s * n + s] = 1;
        for (int a = 0; a < m.n_actions; ++a) {
            const auto row = m.row(static_cast<StateIndex>(s), a);
            for (std::size_t t = 0; t < n; ++t) {
                if (row[t] > 0.0) reach[s * n + t] = 1;
            }
        }
    }
    for (std::size_t len = 1; len < n; len *= 2) {
        std::vector<char> next(n * n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                if (!reach[i * n + k]) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (reach[k * n + j]) next[i * n + j] = 1;
                }
            }
        }
        reach = std::move(next);
    }
    return std::all_of(reach.begin(), reach.end(), [](char c) { return c != 0; });
}

GroundMDP random_mdp(int n_states, int n_actions, double r_max, std::uint64_t seed) {
    if (n_states <= 0 || n_actions <= 0) throw InvalidArgument("random_mdp: sizes must be positive");
    if (!(r_max > 0.0)) throw InvalidArgument("random_mdp: r_max must be positive");
    GroundMDP m(n_states, n_actions, r_max);
    const CounterRng root(seed);
    std::vector<StateIndex> order(static_cast<std::size_t>(n_states));
    for (StateIndex s = 0; s < n_states; ++s) {
        for (ActionIndex a = 0; a < n_actions; ++a) {
            CounterRng rng = root.split({static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(a)});
            const auto k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_states)));
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<StateIndex>(i);
            for (std::size_t i = order.size() - 1; i > 0; --i) {
                std::swap(order[i], order[rng.below(i + 1)]);
            }
            auto row = m.row(s, a);
            double total = 0.0;
            for (int i = 0; i < k; ++i) {
                const double w = rng.uniform() + 0.05;
                row[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = w;
                total += w;
            }
            for (auto& p : row) p /= total;
            m.R(s, a) = r_max * rng.uniform();
        }
    }
    return m;
}

}  // namespace rlao

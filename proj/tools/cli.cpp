#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>

#include "rlao/bounds.hpp"
#include "rlao/dependence.hpp"
#include "rlao/errors.hpp"
#include "rlao/experiments.hpp"
#include "rlao/sampling.hpp"
#include "rlao/serialization.hpp"

#ifndef RLAO_VERSION
#define RLAO_VERSION "unknown"
#endif

namespace rlao {

namespace {

std::string short_form(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

// Parameters shared by the bound subcommands; each subcommand binds a subset.
struct BoundArgs {
    int n_support = 0;
    int n_abstract = 0;
    int n_states = 0;
    int n_actions = 0;
    int horizon = 0;
    int t_eps = 1;
    double n = 0.0;
    double m = 0.0;
    double eps = 0.0;
    double t = 0.0;
    double range = 1.0;
    double kappa = 0.0;
    double delta = 0.0;
    double eta_r = 0.0;
    double eta_t = 0.0;
    double r_max = 1.0;
    double gamma = 0.0;
    std::int64_t k1 = 0;
    std::string variant = "martingale";
    std::string form = "tight";
    bool csv = false;
    bool exact = false;
};

struct Printed {
    std::optional<BoundReport> report;
    double value = 0.0;
    bool integer = false;
};

HorizonSpec horizon_of(const BoundArgs& a) {
    if (a.gamma > 0.0) return HorizonSpec::discount(a.gamma);
    return HorizonSpec::finite(a.horizon);
}

SampleVariant variant_of(const std::string& name) {
    if (name == "martingale") return SampleVariant::martingale;
    if (name == "iid_simulator") return SampleVariant::iid_simulator;
    throw InvalidArgument("unknown variant '" + name + "'");
}

void add_horizon(CLI::App* c, BoundArgs& a) {
    auto* h = c->add_option("--horizon", a.horizon, "finite horizon");
    auto* g = c->add_option("--gamma", a.gamma, "discount factor");
    h->excludes(g);
    g->excludes(h);
}

void add_bound_commands(CLI::App& bound, BoundArgs& a, std::function<Printed()>& compute) {
    auto reg = [&](const std::string& name, const std::string& help, auto setup, std::function<Printed()> fn) {
        auto* c = bound.add_subcommand(name, help);
        setup(c);
        c->add_flag("--csv", a.csv, "print a CSV row with inputs, raw, and clamped values");
        c->add_flag("--exact", a.exact, "print the shortest round-tripping value");
        c->callback([&compute, fn] { compute = fn; });
    };

    reg(
        "weissman", "(2^n - 2) exp(-m eps^2 / 2)",
        [&](CLI::App* c) {
            c->add_option("--n-support", a.n_support)->required();
            c->add_option("--n", a.n)->required();
            c->add_option("--eps", a.eps)->required();
        },
        [&] { return Printed{weissman_bound(a.n_support, a.n, a.eps)}; });
    reg(
        "noniid", "(2^|S̄| - 2) exp(-m eps^2 / 2) for non-identical sources",
        [&](CLI::App* c) {
            c->add_option("--n-abstract", a.n_abstract)->required();
            c->add_option("--m", a.m)->required();
            c->add_option("--eps", a.eps)->required();
        },
        [&] { return Printed{noniid_l1_bound(a.n_abstract, a.m, a.eps)}; });
    reg(
        "abstract_l1", "2^|S̄| exp(-N eps^2 / 8)",
        [&](CLI::App* c) {
            c->add_option("--n-abstract", a.n_abstract)->required();
            c->add_option("--n", a.n)->required();
            c->add_option("--eps", a.eps)->required();
        },
        [&] { return Printed{abstract_l1_bound(a.n_abstract, a.n, a.eps)}; });
    reg(
        "hoeffding", "exp(-2 n t^2 / range^2)",
        [&](CLI::App* c) {
            c->add_option("--n", a.n)->required();
            c->add_option("--t", a.t)->required();
            c->add_option("--range", a.range);
        },
        [&] { return Printed{std::nullopt, hoeffding_tail(a.n, a.t, a.range)}; });
    reg(
        "samples_needed", "smallest sample count meeting a confidence kappa",
        [&](CLI::App* c) {
            c->add_option("--variant", a.variant)->check(CLI::IsMember({"martingale", "iid_simulator"}));
            c->add_option("--n-abstract", a.n_abstract)->required();
            c->add_option("--kappa", a.kappa)->required();
            c->add_option("--eps", a.eps)->required();
        },
        [&] {
            return Printed{std::nullopt,
                           static_cast<double>(samples_needed(a.n_abstract, a.kappa, a.eps, variant_of(a.variant))),
                           true};
        });
    auto value_common = [&](CLI::App* c) {
        c->add_option("--eta-r", a.eta_r)->required();
        c->add_option("--eta-t", a.eta_t)->required();
        c->add_option("--n-abstract", a.n_abstract)->required();
        c->add_option("--r-max", a.r_max);
        add_horizon(c, a);
    };
    reg("value_gap", "value gap between a lifted policy and its abstract value", value_common, [&] {
        return Printed{std::nullopt, value_gap_abstraction(a.eta_r, a.eta_t, a.n_abstract, a.r_max, horizon_of(a))};
    });
    reg(
        "value_loss", "value loss of the lifted abstract optimal policy",
        [&](CLI::App* c) {
            value_common(c);
            c->add_option("--form", a.form)->check(CLI::IsMember({"tight", "loose"}));
        },
        [&] {
            const auto form = a.form == "loose" ? LossForm::loose : LossForm::tight;
            return Printed{std::nullopt,
                           value_loss_bound(a.eta_r, a.eta_t, a.n_abstract, a.r_max, horizon_of(a), form)};
        });
    reg(
        "simulation_lemma", "value gap between two models on one state space",
        [&](CLI::App* c) {
            c->add_option("--eta-r", a.eta_r)->required();
            c->add_option("--eta-t", a.eta_t)->required();
            c->add_option("--n-states", a.n_states)->required();
            c->add_option("--r-max", a.r_max);
            c->add_option("--horizon", a.horizon)->required();
        },
        [&] {
            return Printed{std::nullopt,
                           simulation_lemma_bound(a.eta_r, a.eta_t, a.n_states, a.r_max, a.horizon)};
        });
    reg(
        "learned_model_loss", "value loss when planning in a learned abstract model",
        [&](CLI::App* c) {
            c->add_option("--eta-r", a.eta_r)->required();
            c->add_option("--eta-t", a.eta_t)->required();
            c->add_option("--eps", a.eps)->required();
            c->add_option("--n-abstract", a.n_abstract)->required();
            c->add_option("--r-max", a.r_max);
            c->add_option("--horizon", a.horizon)->required();
        },
        [&] {
            return Printed{std::nullopt,
                           learned_model_loss(a.eta_r, a.eta_t, a.eps, a.n_abstract, a.r_max, a.horizon)};
        });
    reg(
        "g", "abstraction loss term of the R-MAX guarantee",
        [&](CLI::App* c) {
            c->add_option("--t-eps", a.t_eps)->required();
            c->add_option("--eta-r", a.eta_r)->required();
            c->add_option("--eta-t", a.eta_t)->required();
            c->add_option("--n-abstract", a.n_abstract)->required();
            c->add_option("--r-max", a.r_max);
        },
        [&] { return Printed{std::nullopt, g_function(a.t_eps, a.eta_r, a.eta_t, a.n_abstract, a.r_max)}; });
    reg(
        "rmax_k1", "samples per pair for R-MAX",
        [&](CLI::App* c) {
            c->add_option("--n-abstract", a.n_abstract)->required();
            c->add_option("--n-actions", a.n_actions)->required();
            c->add_option("--delta", a.delta)->required();
            c->add_option("--eps", a.eps)->required();
            c->add_option("--t-eps", a.t_eps)->required();
            c->add_option("--r-max", a.r_max);
        },
        [&] {
            return Printed{std::nullopt,
                           static_cast<double>(rmax_k1(a.n_abstract, a.n_actions, a.delta, a.eps, a.t_eps, a.r_max)),
                           true};
        });
    reg(
        "rmax_k2", "learning steps for R-MAX",
        [&](CLI::App* c) {
            c->add_option("--k1", a.k1)->required();
            c->add_option("--n-abstract", a.n_abstract)->required();
            c->add_option("--n-actions", a.n_actions)->required();
            c->add_option("--eps", a.eps)->required();
            c->add_option("--r-max", a.r_max);
            c->add_option("--delta", a.delta)->required();
        },
        [&] {
            return Printed{std::nullopt,
                           static_cast<double>(rmax_k2(a.k1, a.n_abstract, a.n_actions, a.eps, a.r_max, a.delta)),
                           true};
        });
    reg(
        "rmax_k3", "exploitation steps for R-MAX",
        [&](CLI::App* c) {
            c->add_option("--n-abstract", a.n_abstract)->required();
            c->add_option("--t-eps", a.t_eps)->required();
            c->add_option("--eps", a.eps)->required();
            c->add_option("--r-max", a.r_max);
            c->add_option("--delta", a.delta)->required();
        },
        [&] {
            return Printed{std::nullopt,
                           static_cast<double>(rmax_k3(a.n_abstract, a.t_eps, a.eps, a.r_max, a.delta)), true};
        });
}

int print_bound(const Printed& p, const BoundArgs& a, std::ostream& out) {
    if (p.report && a.csv) {
        write_bound_csv_header(out);
        write_bound_csv_row(out, *p.report);
        return kExitPass;
    }
    const double v = p.report ? p.report->clamped : p.value;
    if (p.integer) {
        out << static_cast<std::int64_t>(v) << '\n';
    } else {
        out << (a.exact ? format_double(v) : short_form(v)) << '\n';
    }
    return kExitPass;
}

int run_fixture(std::ostream& out) {
    const auto [m, phi] = counterexample_fixture();
    out << "{\"mdp\":" << mdp_to_json(m) << ",\"abstraction\":" << abstraction_to_json(phi) << "}\n";
    const auto reports = dependence_report(m, phi, *m.start_state, TargetPair{0, 0});
    for (const auto& r : reports) {
        if (r.u != 1 || r.v != 1) continue;
        out << "Pr(Y1=B)=" << format_double(r.marginal_first) << " Pr(Y2=B)=" << format_double(r.marginal_second)
            << '\n';
        out << "joint(B,B)=" << format_double(r.joint) << " product=" << format_double(r.product)
            << " gap=" << format_double(r.gap) << '\n';
    }
    return kExitPass;
}

struct RunArgs {
    std::string config;
    std::string output;
    std::string trace;
    std::int64_t trace_steps = 1000;
    int workers = 0;
};

std::ofstream open_output(const std::string& target) {
    const std::filesystem::path p(target);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream file(target);
    if (!file) throw ConfigError("cannot write '" + target + "'");
    return file;
}

// Hidden states appear in the trace only when the config sets expose_ground.
void write_trace(const ExperimentConfig& cfg, const RunArgs& a, std::ostream& out) {
    if (a.trace_steps < 0) throw ConfigError("--trace-steps must be non-negative");
    auto [m, phi] = materialize(cfg.instance);
    AbstractedEnv env(std::move(m), std::move(phi));
    const auto records = collect_trace(env, a.trace_steps, cfg.seed);
    const std::string target = resolve_output_path(a.trace);
    auto file = open_output(target);
    write_trace_csv(file, records, cfg.expose_ground);
    out << "  trace: " << target << '\n';
}

int run_config(const RunArgs& a, std::ostream& out) {
    const ExperimentConfig cfg = load_config(a.config);
    const SuiteReport report = run_suite(cfg, a.workers);
    write_suite_summary(out, report);
    const std::string target = resolve_output_path(a.output.empty() ? cfg.output : a.output);
    if (!target.empty()) {
        auto csv = open_output(target);
        write_suite_csv(csv, report);
        out << "  csv: " << target << '\n';
    }
    if (!a.trace.empty()) write_trace(cfg, a, out);
    return report.passed() ? kExitPass : kExitSuiteFailure;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Model-based RL from abstracted observations: bounds, suites, and fixtures", "rlao"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run the suite described by a config file");
    run->add_option("config", run_args.config, "config file")->required();
    run->add_option("--output", run_args.output, "CSV path, overrides the config");
    run->add_option("--workers", run_args.workers, "worker threads (default: RLAO_WORKERS or all cores)");
    run->add_option("--trace", run_args.trace, "also write an online trace of the instance to this CSV");
    run->add_option("--trace-steps", run_args.trace_steps, "trace length (default 1000)");

    std::string fixture_name;
    auto* fixture = app.add_subcommand("fixture", "print a built-in fixture");
    fixture->add_option("name", fixture_name)->required()->check(CLI::IsMember({"counterexample"}));

    auto* bound = app.add_subcommand("bound", "evaluate a closed-form bound");
    bound->require_subcommand(1);
    BoundArgs bound_args;
    std::function<Printed()> compute;
    add_bound_commands(*bound, bound_args, compute);

    auto* version = app.add_subcommand("version", "print the version");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfigError;
    }

    try {
        if (*version) {
            out << "rlao " << RLAO_VERSION << '\n';
            return kExitPass;
        }
        if (*fixture) return run_fixture(out);
        if (*bound) return print_bound(compute(), bound_args, out);
        if (*run) return run_config(run_args, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const PreconditionError& e) {
        err << "precondition failed: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSuiteFailure;
    }
    return kExitConfigError;
}

}  // namespace rlao

#include "rlao/serialization.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rlao/errors.hpp"
#include "rlao/experiments.hpp"

namespace rlao {

using json = nlohmann::json;

namespace {

// Object view that remembers which keys were read, so leftovers can be
// reported as unknown.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) fail("expected an object");
    }

    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key) {
        if (!j_.contains(key)) fail("missing required field '" + key + "'");
        seen_.insert(key);
        return j_.at(key);
    }

    template <class T>
    T get(const std::string& key) {
        const json& v = at(key);
        return convert<T>(v, key);
    }

    template <class T>
    T get_or(const std::string& key, T fallback) {
        if (!has(key)) return fallback;
        return get<T>(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) fail("unknown field '" + it.key() + "'");
        }
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }
    [[nodiscard]] const std::string& where() const { return where_; }

private:
    template <class T>
    T convert(const json& v, const std::string& key) const {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) fail("field '" + key + "' must be a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer()) fail("field '" + key + "' must be an integer");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) fail("field '" + key + "' must be a boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) fail("field '" + key + "' must be a string");
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            fail("field '" + key + "': " + e.what());
        }
    }

    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

template <class T>
std::vector<T> number_array(Fields& f, const std::string& key) {
    const json& v = f.at(key);
    if (!v.is_array()) f.fail("field '" + key + "' must be an array");
    std::vector<T> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if constexpr (std::is_integral_v<T>) {
            if (!x.is_number_integer()) f.fail("field '" + key + "' must hold integers");
        } else {
            if (!x.is_number()) f.fail("field '" + key + "' must hold numbers");
        }
        out.push_back(x.get<T>());
    }
    return out;
}

json parse_text(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
}

std::string dump(const json& j, int indent) { return j.dump(indent); }

// --- models ------------------------------------------------------------------

json mdp_json(const GroundMDP& m) {
    json j;
    j["n_states"] = m.n_states;
    j["n_actions"] = m.n_actions;
    j["r_max"] = m.r_max;
    j["reward"] = m.reward;
    j["transition"] = m.transition;
    if (m.start_state) j["start_state"] = *m.start_state;
    return j;
}

GroundMDP mdp_parse(const json& j, const std::string& where) {
    Fields f(j, where);
    const int n = f.get<int>("n_states");
    const int na = f.get<int>("n_actions");
    if (n <= 0 || na <= 0) f.fail("n_states and n_actions must be positive");
    GroundMDP m(n, na, f.get<double>("r_max"));
    m.reward = number_array<double>(f, "reward");
    m.transition = number_array<double>(f, "transition");
    if (f.has("start_state")) m.start_state = f.get<int>("start_state");
    f.finish();
    try {
        m.check_shape();
    } catch (const InvalidArgument& e) {
        f.fail(e.what());
    }
    if (m.start_state && !m.valid_state(*m.start_state)) f.fail("start_state out of range");
    const auto report = validate_mdp(m);
    if (!report.ok()) f.fail("invalid MDP: " + report.violations.front().what);
    return m;
}

json abstraction_json(const Abstraction& phi) {
    return json{{"map", phi.map()}, {"n_abstract", phi.n_abstract()}};
}

Abstraction abstraction_parse(const json& j, const std::string& where) {
    Fields f(j, where);
    auto map = number_array<int>(f, "map");
    const int n = f.get<int>("n_abstract");
    f.finish();
    try {
        return {std::move(map), n};
    } catch (const InvalidArgument& e) {
        f.fail(e.what());
    }
}

}  // namespace

std::string mdp_to_json(const GroundMDP& m, int indent) { return dump(mdp_json(m), indent); }
GroundMDP mdp_from_json(std::string_view text) { return mdp_parse(parse_text(text), "mdp"); }

std::string abstraction_to_json(const Abstraction& phi, int indent) { return dump(abstraction_json(phi), indent); }
Abstraction abstraction_from_json(std::string_view text) {
    return abstraction_parse(parse_text(text), "abstraction");
}

std::string weighting_to_json(const WeightingFn& w, int indent) {
    return dump(json{{"n_states", w.n_states()}, {"n_actions", w.n_actions()}, {"weights", w.weights()}}, indent);
}

WeightingFn weighting_from_json(std::string_view text) {
    const json j = parse_text(text);
    Fields f(j, "weighting");
    const int n = f.get<int>("n_states");
    const int na = f.get<int>("n_actions");
    auto w = number_array<double>(f, "weights");
    f.finish();
    try {
        return {n, na, std::move(w)};
    } catch (const InvalidArgument& e) {
        f.fail(e.what());
    }
}

// --- experiment configs ----------------------------------------------------------

namespace {

const char* sampler_name(SamplerKind k) {
    switch (k) {
        case SamplerKind::online: return "online";
        case SamplerKind::simulator: return "simulator";
        case SamplerKind::independent: return "independent";
    }
    return "online";
}

SamplerKind sampler_parse(Fields& f, const std::string& name) {
    if (name == "online") return SamplerKind::online;
    if (name == "simulator") return SamplerKind::simulator;
    if (name == "independent") return SamplerKind::independent;
    f.fail("unknown sampler '" + name + "'");
}

const char* prototype_name(PrototypeRule r) {
    return r == PrototypeRule::lowest_index ? "lowest_index" : "random_member";
}

PrototypeRule prototype_parse(Fields& f, const std::string& name) {
    if (name == "lowest_index") return PrototypeRule::lowest_index;
    if (name == "random_member") return PrototypeRule::random_member;
    f.fail("unknown prototype rule '" + name + "'");
}

json instance_json(const InstanceSpec& spec) {
    switch (spec.type) {
        case InstanceSpec::Type::fixture:
            return json{{"type", "fixture"}, {"name", spec.fixture}};
        case InstanceSpec::Type::inline_model:
            return json{{"type", "inline"}, {"mdp", mdp_json(spec.mdp)}, {"abstraction", abstraction_json(spec.abstraction)}};
        case InstanceSpec::Type::generator: {
            const auto& g = spec.generator;
            return json{{"type", "generator"},         {"n_abstract", g.n_abstract},
                        {"block_sizes", g.block_sizes}, {"n_actions", g.n_actions},
                        {"target_eta_t", g.target_eta_t}, {"target_eta_r", g.target_eta_r},
                        {"r_max", g.r_max},             {"seed", g.seed}};
        }
    }
    return {};
}

InstanceSpec instance_parse(const json& j) {
    Fields f(j, "instance");
    InstanceSpec spec;
    const auto type = f.get<std::string>("type");
    if (type == "fixture") {
        spec.type = InstanceSpec::Type::fixture;
        spec.fixture = f.get<std::string>("name");
        if (spec.fixture != "counterexample") f.fail("unknown fixture '" + spec.fixture + "'");
    } else if (type == "inline") {
        spec.type = InstanceSpec::Type::inline_model;
        spec.mdp = mdp_parse(f.at("mdp"), "instance.mdp");
        spec.abstraction = abstraction_parse(f.at("abstraction"), "instance.abstraction");
        if (spec.abstraction.n_states() != spec.mdp.n_states) {
            f.fail("abstraction covers " + std::to_string(spec.abstraction.n_states()) + " states, MDP has " +
                   std::to_string(spec.mdp.n_states));
        }
    } else if (type == "generator") {
        spec.type = InstanceSpec::Type::generator;
        auto& g = spec.generator;
        g.n_abstract = f.get<int>("n_abstract");
        g.block_sizes = number_array<int>(f, "block_sizes");
        g.n_actions = f.get<int>("n_actions");
        g.target_eta_t = f.get<double>("target_eta_t");
        g.target_eta_r = f.get<double>("target_eta_r");
        g.r_max = f.get_or<double>("r_max", 1.0);
        g.seed = f.get_or<std::uint64_t>("seed", 0);
        try {
            (void)generate_benchmark(g);
        } catch (const InvalidArgument& e) {
            f.fail(e.what());
        }
    } else {
        f.fail("unknown instance type '" + type + "'");
    }
    f.finish();
    return spec;
}

void require(Fields& f, bool ok, const std::string& msg) {
    if (!ok) f.fail(msg);
}

template <class T, class Pred>
void require_all(Fields& f, const std::vector<T>& xs, Pred pred, const std::string& msg) {
    require(f, !xs.empty(), msg + " (empty list)");
    for (const auto& x : xs) require(f, pred(x), msg);
}

json section_json(const ExperimentConfig& c) {
    switch (c.kind) {
        case SuiteKind::counterexample: return nullptr;
        case SuiteKind::concentration: {
            const auto& s = c.concentration;
            return json{{"sampler", sampler_name(s.sampler)},
                        {"sample_sizes", s.sample_sizes},
                        {"eps", s.eps},
                        {"target", {{"state", s.target.state}, {"action", s.target.action}}},
                        {"step_cap", s.step_cap}};
        }
        case SuiteKind::value_bounds: {
            const auto& s = c.value_bounds;
            return json{{"count", s.count},         {"max_states", s.max_states}, {"max_abstract", s.max_abstract},
                        {"max_actions", s.max_actions}, {"horizons", s.horizons},   {"gammas", s.gammas},
                        {"max_eta_t", s.max_eta_t}, {"max_eta_r", s.max_eta_r}, {"model_eps", s.model_eps},
                        {"exact_every", s.exact_every}, {"slack", s.slack}};
        }
        case SuiteKind::martingale: {
            const auto& s = c.martingale;
            return json{{"depth", s.depth},
                        {"random_instances", s.random_instances},
                        {"random_states", s.random_states},
                        {"random_blocks", s.random_blocks},
                        {"random_actions", s.random_actions},
                        {"tolerance", s.tolerance}};
        }
        case SuiteKind::simulator_sampling: {
            const auto& s = c.simulator;
            return json{{"delta", s.delta}, {"eps", s.eps}, {"prototype", prototype_name(s.prototype)}};
        }
        case SuiteKind::rmax_compare: {
            const auto& s = c.rmax;
            return json{{"delta", s.run.delta},
                        {"eps", s.run.eps},
                        {"t_eps", s.run.t_eps},
                        {"m_known", s.run.m_known},
                        {"max_steps", s.run.max_steps},
                        {"eval_window", s.run.eval_window},
                        {"seeds", s.seeds},
                        {"min_return_passes", s.min_return_passes},
                        {"min_speed_passes", s.min_speed_passes}};
        }
    }
    return nullptr;
}

std::string section_name(SuiteKind k) {
    switch (k) {
        case SuiteKind::counterexample: return "";
        case SuiteKind::concentration: return "concentration";
        case SuiteKind::value_bounds: return "value_bounds";
        case SuiteKind::martingale: return "martingale";
        case SuiteKind::simulator_sampling: return "simulator";
        case SuiteKind::rmax_compare: return "rmax";
    }
    return "";
}

void section_parse(ExperimentConfig& c, const json& j) {
    Fields f(j, section_name(c.kind));
    switch (c.kind) {
        case SuiteKind::counterexample: break;
        case SuiteKind::concentration: {
            auto& s = c.concentration;
            if (f.has("sampler")) s.sampler = sampler_parse(f, f.get<std::string>("sampler"));
            if (f.has("sample_sizes")) s.sample_sizes = number_array<int>(f, "sample_sizes");
            if (f.has("eps")) s.eps = number_array<double>(f, "eps");
            if (f.has("target")) {
                Fields t(f.at("target"), "concentration.target");
                s.target.state = t.get<int>("state");
                s.target.action = t.get<int>("action");
                t.finish();
            }
            s.step_cap = f.get_or<std::int64_t>("step_cap", s.step_cap);
            require_all(f, s.sample_sizes, [](int n) { return n >= 1; }, "sample_sizes must be positive");
            require_all(f, s.eps, [](double e) { return e > 0.0; }, "eps values must be positive");
            require(f, s.step_cap >= 1, "step_cap must be positive");
            break;
        }
        case SuiteKind::value_bounds: {
            auto& s = c.value_bounds;
            s.count = f.get_or("count", s.count);
            s.max_states = f.get_or("max_states", s.max_states);
            s.max_abstract = f.get_or("max_abstract", s.max_abstract);
            s.max_actions = f.get_or("max_actions", s.max_actions);
            if (f.has("horizons")) s.horizons = number_array<int>(f, "horizons");
            if (f.has("gammas")) s.gammas = number_array<double>(f, "gammas");
            s.max_eta_t = f.get_or("max_eta_t", s.max_eta_t);
            s.max_eta_r = f.get_or("max_eta_r", s.max_eta_r);
            s.model_eps = f.get_or("model_eps", s.model_eps);
            s.exact_every = f.get_or("exact_every", s.exact_every);
            s.slack = f.get_or("slack", s.slack);
            require(f, s.count >= 1, "count must be positive");
            require(f, s.max_abstract >= 1 && s.max_states >= s.max_abstract, "need 1 <= max_abstract <= max_states");
            require(f, s.max_actions >= 1, "max_actions must be positive");
            require_all(f, s.horizons, [](int h) { return h >= 1 && h <= 6; }, "horizons must lie in [1, 6]");
            require_all(f, s.gammas, [](double g) { return g > 0.0 && g < 1.0; }, "gammas must lie in (0, 1)");
            require(f, s.max_eta_t >= 0.0 && s.max_eta_t <= 2.0, "max_eta_t must lie in [0, 2]");
            require(f, s.max_eta_r >= 0.0 && s.max_eta_r <= 1.0, "max_eta_r must lie in [0, 1]");
            require(f, s.model_eps >= 0.0 && s.model_eps <= 1.0, "model_eps must lie in [0, 1]");
            require(f, s.exact_every >= 0, "exact_every must be nonnegative");
            require(f, s.slack >= 0.0, "slack must be nonnegative");
            break;
        }
        case SuiteKind::martingale: {
            auto& s = c.martingale;
            s.depth = f.get_or("depth", s.depth);
            s.random_instances = f.get_or("random_instances", s.random_instances);
            s.random_states = f.get_or("random_states", s.random_states);
            s.random_blocks = f.get_or("random_blocks", s.random_blocks);
            s.random_actions = f.get_or("random_actions", s.random_actions);
            s.tolerance = f.get_or("tolerance", s.tolerance);
            require(f, s.depth >= 1 && s.depth <= 8, "depth must lie in [1, 8]");
            require(f, s.random_instances >= 0, "random_instances must be nonnegative");
            require(f, s.random_blocks >= 1 && s.random_states >= s.random_blocks && s.random_states <= 8,
                    "need 1 <= random_blocks <= random_states <= 8");
            require(f, s.random_actions >= 1, "random_actions must be positive");
            require(f, s.tolerance > 0.0, "tolerance must be positive");
            break;
        }
        case SuiteKind::simulator_sampling: {
            auto& s = c.simulator;
            if (f.has("delta")) s.delta = number_array<double>(f, "delta");
            if (f.has("eps")) s.eps = number_array<double>(f, "eps");
            if (f.has("prototype")) s.prototype = prototype_parse(f, f.get<std::string>("prototype"));
            require_all(f, s.delta, [](double d) { return d > 0.0 && d < 1.0; }, "delta values must lie in (0, 1)");
            require_all(f, s.eps, [](double e) { return e > 0.0 && e < 2.0; }, "eps values must lie in (0, 2)");
            break;
        }
        case SuiteKind::rmax_compare: {
            auto& s = c.rmax;
            s.run.delta = f.get_or("delta", s.run.delta);
            s.run.eps = f.get_or("eps", s.run.eps);
            s.run.t_eps = f.get_or("t_eps", s.run.t_eps);
            s.run.m_known = f.get_or("m_known", s.run.m_known);
            s.run.max_steps = f.get_or("max_steps", s.run.max_steps);
            s.run.eval_window = f.get_or("eval_window", s.run.eval_window);
            s.seeds = f.get_or("seeds", s.seeds);
            s.min_return_passes = f.get_or("min_return_passes", s.min_return_passes);
            s.min_speed_passes = f.get_or("min_speed_passes", s.min_speed_passes);
            try {
                s.run.validate();
            } catch (const InvalidArgument& e) {
                f.fail(e.what());
            }
            require(f, s.seeds >= 1, "seeds must be positive");
            require(f, s.min_return_passes >= 0 && s.min_return_passes <= s.seeds,
                    "min_return_passes must lie in [0, seeds]");
            require(f, s.min_speed_passes >= 0 && s.min_speed_passes <= s.seeds,
                    "min_speed_passes must lie in [0, seeds]");
            break;
        }
    }
    f.finish();
}

}  // namespace

bool operator==(const InstanceSpec& a, const InstanceSpec& b) {
    if (a.type != b.type) return false;
    switch (a.type) {
        case InstanceSpec::Type::fixture: return a.fixture == b.fixture;
        case InstanceSpec::Type::inline_model:
            return a.mdp.n_states == b.mdp.n_states && a.mdp.n_actions == b.mdp.n_actions &&
                   a.mdp.transition == b.mdp.transition && a.mdp.reward == b.mdp.reward &&
                   a.mdp.r_max == b.mdp.r_max && a.mdp.start_state == b.mdp.start_state &&
                   a.abstraction == b.abstraction;
        case InstanceSpec::Type::generator: return a.generator == b.generator;
    }
    return false;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.schema_version == b.schema_version && a.kind == b.kind && a.seed == b.seed && a.trials == b.trials &&
           a.tolerance_se == b.tolerance_se && a.expose_ground == b.expose_ground && a.output == b.output &&
           a.instance == b.instance && a.concentration == b.concentration && a.value_bounds == b.value_bounds &&
           a.martingale == b.martingale && a.simulator == b.simulator && a.rmax == b.rmax;
}

ExperimentConfig parse_config(std::string_view text) {
    const json j = parse_text(text);
    Fields f(j, "config");
    ExperimentConfig c;
    c.schema_version = f.get<int>("schema_version");
    if (c.schema_version != kSchemaVersion) {
        f.fail("unsupported schema_version " + std::to_string(c.schema_version) + ", expected " +
               std::to_string(kSchemaVersion));
    }
    c.kind = suite_kind_from_string(f.get<std::string>("kind"));
    c.seed = f.get_or<std::uint64_t>("seed", c.seed);
    c.trials = f.get_or("trials", c.trials);
    c.tolerance_se = f.get_or("tolerance_se", c.tolerance_se);
    c.expose_ground = f.get_or("expose_ground", c.expose_ground);
    c.output = f.get_or<std::string>("output", c.output);
    if (f.has("instance")) c.instance = instance_parse(f.at("instance"));
    require(f, c.trials >= 1, "trials must be positive");
    require(f, c.tolerance_se >= 0.0, "tolerance_se must be nonnegative");

    const std::string section = section_name(c.kind);
    for (const char* other : {"concentration", "value_bounds", "martingale", "simulator", "rmax"}) {
        if (section != other && f.has(other)) {
            f.fail("section '" + std::string(other) + "' does not belong to kind '" + std::string(to_string(c.kind)) +
                   "'");
        }
    }
    if (!section.empty()) {
        section_parse(c, f.has(section) ? f.at(section) : json::object());
    }
    f.finish();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c, int indent) {
    json j;
    j["schema_version"] = c.schema_version;
    j["kind"] = std::string(to_string(c.kind));
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["tolerance_se"] = c.tolerance_se;
    j["expose_ground"] = c.expose_ground;
    j["output"] = c.output;
    j["instance"] = instance_json(c.instance);
    const std::string section = section_name(c.kind);
    if (!section.empty()) j[section] = section_json(c);
    return dump(j, indent);
}

}  // namespace rlao

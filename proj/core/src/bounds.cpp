#include "rlao/bounds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "rlao/errors.hpp"

namespace rlao {

namespace {

constexpr double kMaxCount = 9.0e18;

void require_positive_eps(double eps) {
    if (!(eps > 0.0)) {
        throw InvalidArgument("eps must be positive, got " + format_double(eps));
    }
}

void require_support(int n) {
    if (n < 1) {
        throw InvalidArgument("support size must be at least 1, got " + std::to_string(n));
    }
}

void require_nonnegative(double x, const char* what) {
    if (!(x >= 0.0)) {
        throw InvalidArgument(std::string(what) + " must be nonnegative, got " + format_double(x));
    }
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

BoundReport probability_report(std::string name, std::vector<std::pair<std::string, double>> inputs, double raw) {
    return {std::move(name), std::move(inputs), raw, clamp01(raw), true};
}

double pow2(int n) { return std::ldexp(1.0, n); }

std::int64_t to_count(double x, const char* what) {
    if (!(x < kMaxCount)) {
        throw InvalidArgument(std::string(what) + " exceeds the representable range");
    }
    return x <= 0.0 ? 0 : static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace

BoundReport weissman_bound(int n_support, double n_samples, double eps) {
    require_support(n_support);
    require_positive_eps(eps);
    require_nonnegative(n_samples, "sample count");
    const double raw = (pow2(n_support) - 2.0) * std::exp(-n_samples * eps * eps / 2.0);
    return probability_report("weissman", {{"n_support", n_support}, {"n", n_samples}, {"eps", eps}}, raw);
}

BoundReport noniid_l1_bound(int n_abstract, double m, double eps) {
    auto r = weissman_bound(n_abstract, m, eps);
    r.name = "noniid_l1";
    r.inputs = {{"n_abstract", n_abstract}, {"m", m}, {"eps", eps}};
    return r;
}

BoundReport abstract_l1_bound(int n_abstract, double n_samples, double eps) {
    require_support(n_abstract);
    require_positive_eps(eps);
    require_nonnegative(n_samples, "sample count");
    const double raw = pow2(n_abstract) * std::exp(-n_samples * eps * eps / 8.0);
    return probability_report("abstract_l1", {{"n_abstract", n_abstract}, {"n", n_samples}, {"eps", eps}}, raw);
}

double hoeffding_tail(double n_samples, double t, double range) {
    require_nonnegative(n_samples, "sample count");
    if (!(range > 0.0)) {
        throw InvalidArgument("range must be positive");
    }
    return std::exp(-2.0 * n_samples * t * t / (range * range));
}

double union_bound(std::span<const double> probabilities) {
    double total = 0.0;
    for (double p : probabilities) total += p;
    return std::min(1.0, total);
}

// ---------------------------------------------------------------------------
// Sample counts

namespace {

void require_kappa_eps(double kappa, double eps) {
    if (!(kappa > 0.0 && kappa < 1.0)) {
        throw InvalidArgument("kappa must lie in (0, 1), got " + format_double(kappa));
    }
    if (!(eps > 0.0 && eps < 2.0)) {
        throw InvalidArgument("eps must lie in (0, 2), got " + format_double(eps));
    }
}

}  // namespace

double sample_requirement(int n_abstract, double kappa, double eps, SampleVariant variant) {
    require_support(n_abstract);
    require_kappa_eps(kappa, eps);
    if (variant == SampleVariant::martingale) {
        return 8.0 * (std::log(pow2(n_abstract)) - std::log(kappa)) / (eps * eps);
    }
    return 2.0 * (std::log(pow2(n_abstract) - 2.0) - std::log(kappa)) / (eps * eps);
}

bool sample_count_suffices(std::int64_t m, int n_abstract, double kappa, double eps, SampleVariant variant) {
    const auto n = static_cast<double>(m);
    const double delta = variant == SampleVariant::martingale ? abstract_l1_bound(n_abstract, n, eps).raw
                                                              : weissman_bound(n_abstract, n, eps).raw;
    return delta <= kappa;
}

std::int64_t samples_needed(int n_abstract, double kappa, double eps, SampleVariant variant) {
    // At least one sample: a single-state support gives a zero iid bound.
    std::int64_t m = std::max<std::int64_t>(1, to_count(sample_requirement(n_abstract, kappa, eps, variant), "sample count"));
    while (!sample_count_suffices(m, n_abstract, kappa, eps, variant)) ++m;
    while (m > 1 && sample_count_suffices(m - 1, n_abstract, kappa, eps, variant)) --m;
    return m;
}

// ---------------------------------------------------------------------------
// Value bounds

namespace {

void require_horizon_spec(HorizonSpec hs) {
    if (hs.discounted) {
        if (!(hs.gamma > 0.0 && hs.gamma < 1.0)) {
            throw InvalidArgument("discount must lie in (0, 1), got " + format_double(hs.gamma));
        }
    } else if (hs.h < 1) {
        throw InvalidArgument("horizon must be at least 1, got " + std::to_string(hs.h));
    }
}

void require_errors(double eta_r, double eta_t) {
    require_nonnegative(eta_r, "eta_R");
    require_nonnegative(eta_t, "eta_T");
}

}  // namespace

double value_gap_abstraction(double eta_r, double eta_t, int n_abstract, double r_max, HorizonSpec horizon,
                             GapKind) {
    require_errors(eta_r, eta_t);
    require_horizon_spec(horizon);
    const double k = static_cast<double>(n_abstract) * r_max;
    if (horizon.discounted) {
        const double g = horizon.gamma;
        return eta_r / (1.0 - g) + g * eta_t * k / ((1.0 - g) * (1.0 - g));
    }
    const double h = horizon.h;
    return h * eta_r + (h - 1.0) * h / 2.0 * eta_t * k;
}

double value_loss_bound(double eta_r, double eta_t, int n_abstract, double r_max, HorizonSpec horizon,
                           LossForm form) {
    if (form == LossForm::loose && !horizon.discounted) {
        require_errors(eta_r, eta_t);
        require_horizon_spec(horizon);
        const double h = horizon.h;
        return 2.0 * h * eta_r + (h + 1.0) * h * eta_t * static_cast<double>(n_abstract) * r_max;
    }
    return 2.0 * value_gap_abstraction(eta_r, eta_t, n_abstract, r_max, horizon);
}

double simulation_lemma_bound(double eta_r, double eta_t, int n_states, double r_max, int n) {
    require_errors(eta_r, eta_t);
    require_horizon_spec(HorizonSpec::finite(n));
    const double nn = n;
    return nn * eta_r + (nn - 1.0) * nn / 2.0 * eta_t * static_cast<double>(n_states) * r_max;
}

double learned_model_loss(double eta_r, double eta_t, double eps, int n_abstract, double r_max, int n) {
    require_errors(eta_r, eta_t);
    require_nonnegative(eps, "eps");
    require_horizon_spec(HorizonSpec::finite(n));
    const double nn = n;
    return 2.0 * nn * eta_r + (nn - 1.0) * nn * (eta_t + eps) * static_cast<double>(n_abstract) * r_max;
}

double g_function(int t_eps, double eta_r, double eta_t, int n_abstract, double r_max) {
    require_errors(eta_r, eta_t);
    require_horizon_spec(HorizonSpec::finite(t_eps));
    const double t = t_eps;
    return t * eta_r + (t - 1.0) * t / 2.0 * eta_t * static_cast<double>(n_abstract) * r_max;
}

double rmax_return_target(double opt, double g, int t_eps, double eps) {
    require_horizon_spec(HorizonSpec::finite(t_eps));
    return opt - 3.0 * g / static_cast<double>(t_eps) - 2.0 * eps;
}

// ---------------------------------------------------------------------------
// R-MAX constants

namespace {

void require_rmax_inputs(int n_abstract, int n_actions, double delta, double eps, double r_max) {
    require_support(n_abstract);
    if (n_actions < 1) {
        throw InvalidArgument("action count must be at least 1");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidArgument("delta must lie in (0, 1), got " + format_double(delta));
    }
    require_positive_eps(eps);
    if (!(r_max > 0.0)) {
        throw InvalidArgument("r_max must be positive");
    }
}

// Smallest integer k >= lo with pred(k), for pred monotone on [lo, inf).
template <class Pred>
std::int64_t smallest_from(std::int64_t lo, Pred pred) {
    if (pred(lo)) return lo;
    std::int64_t step = 1;
    std::int64_t hi = lo + step;
    while (!pred(hi)) {
        lo = hi;
        if (step > (std::numeric_limits<std::int64_t>::max() / 4)) {
            throw InvalidArgument("constraint unsatisfiable in 64-bit range");
        }
        step *= 2;
        hi = lo + step;
    }
    // pred(lo) false, pred(hi) true
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (pred(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

double rmax_k1_requirement(int n_abstract, int n_actions, double delta, double eps, int t_eps, double r_max) {
    require_rmax_inputs(n_abstract, n_actions, delta, eps, r_max);
    require_horizon_spec(HorizonSpec::finite(t_eps));
    const double n = n_abstract;
    const double t1 = t_eps - 1.0;
    const double kappa = delta / (3.0 * n * n_actions);
    return 32.0 * n * n * r_max * r_max * t1 * t1 * (std::log(pow2(n_abstract) - 2.0) - std::log(kappa)) /
           (9.0 * eps * eps);
}

std::int64_t rmax_k1(int n_abstract, int n_actions, double delta, double eps, int t_eps, double r_max) {
    const double req = rmax_k1_requirement(n_abstract, n_actions, delta, eps, t_eps, r_max);
    if (t_eps == 1) {
        const double kappa = delta / (3.0 * n_abstract * n_actions);
        const double e = std::min(eps, std::nextafter(2.0, 0.0));
        return std::max<std::int64_t>(1, samples_needed(n_abstract, kappa, e, SampleVariant::martingale));
    }
    auto ok = [&](std::int64_t k) { return static_cast<double>(k) >= req; };
    std::int64_t k = std::max<std::int64_t>(1, to_count(req, "K1"));
    while (!ok(k)) ++k;
    while (k > 1 && ok(k - 1)) --k;
    return k;
}

bool rmax_k2_satisfied(std::int64_t k2, std::int64_t k1, int n_abstract, int n_actions, double eps, double r_max,
                       double delta) {
    const auto k = static_cast<double>(k2);
    const double c = 3.0 * eps / (8.0 * r_max);
    const double root = std::cbrt(k);
    const double need = static_cast<double>(k1) * n_abstract * n_actions;
    return c * k - root * root >= need && std::exp(-2.0 * root) <= delta / 3.0;
}

std::int64_t rmax_k2(std::int64_t k1, int n_abstract, int n_actions, double eps, double r_max, double delta) {
    require_rmax_inputs(n_abstract, n_actions, delta, eps, r_max);
    if (k1 < 1) {
        throw InvalidArgument("K1 must be at least 1");
    }
    // c K - K^(2/3) increases once K^(1/3) > 2 / (3c); below that it is negative.
    const double c = 3.0 * eps / (8.0 * r_max);
    const double turn = 2.0 / (3.0 * c);
    const std::int64_t lo = std::max<std::int64_t>(1, to_count(turn * turn * turn, "K2"));
    return smallest_from(lo, [&](std::int64_t k) {
        return rmax_k2_satisfied(k, k1, n_abstract, n_actions, eps, r_max, delta);
    });
}

bool rmax_k3_satisfied(std::int64_t k3, double eps, double r_max, double delta) {
    if (k3 < 1) return false;
    const auto k = static_cast<double>(k3);
    // R / K^(1/3) <= eps / 2 in cubed form, exact for integer cubes.
    const double ratio = 2.0 * r_max / eps;
    return k >= ratio * ratio * ratio && std::exp(-2.0 * std::cbrt(k)) <= delta / 3.0;
}

std::int64_t rmax_k3(int n_abstract, int t_eps, double eps, double r_max, double delta) {
    require_rmax_inputs(n_abstract, 1, delta, eps, r_max);
    require_horizon_spec(HorizonSpec::finite(t_eps));
    const std::int64_t unit = static_cast<std::int64_t>(n_abstract) * t_eps;
    const std::int64_t z =
        smallest_from(1, [&](std::int64_t zz) { return rmax_k3_satisfied(zz * unit, eps, r_max, delta); });
    return z * unit;
}

// ---------------------------------------------------------------------------

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

void write_bound_csv_header(std::ostream& out) { out << "name,inputs,raw,clamped\n"; }

void write_bound_csv_row(std::ostream& out, const BoundReport& report) {
    out << report.name << ',';
    for (std::size_t i = 0; i < report.inputs.size(); ++i) {
        if (i) out << ';';
        out << report.inputs[i].first << '=' << format_double(report.inputs[i].second);
    }
    out << ',' << format_double(report.raw) << ',' << format_double(report.clamped) << '\n';
}

}  // namespace rlao

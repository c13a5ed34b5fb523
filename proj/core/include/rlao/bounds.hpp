#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rlao {

struct BoundReport {
    std::string name;
    std::vector<std::pair<std::string, double>> inputs;
    double raw = 0.0;
    double clamped = 0.0;  // min(1, max(0, raw)) for probability bounds, raw otherwise
    bool probability = true;
};

/// (2^n - 2) exp(-m eps^2 / 2). Throws InvalidArgument for eps <= 0.
BoundReport weissman_bound(int n_support, double n_samples, double eps);
/// Same functional form over the abstract state count.
BoundReport noniid_l1_bound(int n_abstract, double m, double eps);
/// 2^n exp(-m eps^2 / 8).
BoundReport abstract_l1_bound(int n_abstract, double n_samples, double eps);

/// exp(-2 n t^2 / range^2), the one-sided Hoeffding tail for a mean of n
/// samples with the given range.
double hoeffding_tail(double n_samples, double t, double range = 1.0);
/// min(1, sum of probabilities).
double union_bound(std::span<const double> probabilities);

enum class SampleVariant { martingale, iid_simulator };

/// Unrounded right-hand side of the sample-count inequality.
double sample_requirement(int n_abstract, double kappa, double eps, SampleVariant variant);
/// True when m samples push the matching bound to at most kappa.
bool sample_count_suffices(std::int64_t m, int n_abstract, double kappa, double eps, SampleVariant variant);
/// Smallest m with sample_count_suffices. Throws InvalidArgument unless
/// 0 < kappa < 1 and 0 < eps < 2.
std::int64_t samples_needed(int n_abstract, double kappa, double eps, SampleVariant variant);

struct HorizonSpec {
    bool discounted = false;
    int h = 1;
    double gamma = 0.0;

    static HorizonSpec finite(int horizon) { return {false, horizon, 0.0}; }
    static HorizonSpec discount(double g) { return {true, 0, g}; }
};

enum class GapKind { policy_vs_abstract, optimal_pair };
enum class LossForm { tight, loose };

/// h eta_R + ((h-1)h/2) eta_T |S̄| R_max, or eta_R/(1-g) + g eta_T |S̄| R_max/(1-g)^2.
/// Both gap kinds share the formula; `which` is a label only.
double value_gap_abstraction(double eta_r, double eta_t, int n_abstract, double r_max, HorizonSpec horizon,
                             GapKind which = GapKind::policy_vs_abstract);

/// Twice value_gap_abstraction. The loose form uses (h+1)h in place of
/// (h-1)h for finite horizons; discounted forms coincide.
double value_loss_bound(double eta_r, double eta_t, int n_abstract, double r_max, HorizonSpec horizon,
                           LossForm form = LossForm::tight);

/// n eta_R + ((n-1)n/2) eta_T |S| R_max for two models on one state space.
double simulation_lemma_bound(double eta_r, double eta_t, int n_states, double r_max, int n);

/// 2n eta_R + (n-1)n (eta_T + eps) |S̄| R_max.
double learned_model_loss(double eta_r, double eta_t, double eps, int n_abstract, double r_max, int n);

/// T eta_R + ((T-1)T/2) eta_T |S̄| R_max.
double g_function(int t_eps, double eta_r, double eta_t, int n_abstract, double r_max);

/// Opt - 3 g / T - 2 eps, the per-step return guarantee of abstract R-MAX.
double rmax_return_target(double opt, double g, int t_eps, double eps);

/// 32 |S̄|^2 R^2 (T-1)^2 [ln(2^|S̄| - 2) - ln(delta / (3 |S̄| |A|))] / (9 eps^2).
double rmax_k1_requirement(int n_abstract, int n_actions, double delta, double eps, int t_eps, double r_max);
/// Smallest integer K1 >= 1 meeting the requirement. At T = 1 the
/// requirement is degenerate and the martingale sample count at
/// kappa = delta / (3 |S̄| |A|) is returned instead.
std::int64_t rmax_k1(int n_abstract, int n_actions, double delta, double eps, int t_eps, double r_max);

bool rmax_k2_satisfied(std::int64_t k2, std::int64_t k1, int n_abstract, int n_actions, double eps, double r_max,
                       double delta);
/// Smallest K2 with (3 eps / 8)(K2 / R) - K2^(2/3) >= K1 |S̄| |A| and
/// exp(-2 K2^(1/3)) <= delta / 3.
std::int64_t rmax_k2(std::int64_t k1, int n_abstract, int n_actions, double eps, double r_max, double delta);

bool rmax_k3_satisfied(std::int64_t k3, double eps, double r_max, double delta);
/// Smallest K3 = Z |S̄| T with R / K3^(1/3) <= eps / 2 and
/// exp(-2 K3^(1/3)) <= delta / 3.
std::int64_t rmax_k3(int n_abstract, int t_eps, double eps, double r_max, double delta);

/// CSV: name,inputs,raw,clamped with inputs as "k=v;k=v".
void write_bound_csv_header(std::ostream& out);
void write_bound_csv_row(std::ostream& out, const BoundReport& report);

/// Shortest round-tripping decimal form.
std::string format_double(double x);

}  // namespace rlao

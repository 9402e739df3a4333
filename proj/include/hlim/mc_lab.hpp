#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hlim/core_math.hpp"
#include "hlim/functionals.hpp"
#include "hlim/path_engine.hpp"

namespace hlim {

struct StatTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    bool small_sample = false;  // n < 100: p-value flagged as unreliable
};

// One-sample Kolmogorov-Smirnov test of `samples` against N(0, sigma2);
// p-value from the asymptotic Kolmogorov series truncated at 100 terms.
StatTestResult ks_normal_test(const std::vector<double>& samples,
                              double sigma2);

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// OLS of log(variance) on log(eps); all inputs must be positive.
RegressionResult variance_scaling_regression(
    const std::vector<std::pair<double, double>>& points);

// Moments with pairwise compensated reduction; order-independent.
struct MomentSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;       // unbiased
    double second_moment = 0.0;  // uncentered
    double se_mean = 0.0;
    double se_variance = 0.0;
    double se_second_moment = 0.0;
};
MomentSummary summarize_moments(const std::vector<double>& xs);

struct ExperimentConfig {
    FunctionalKind kind;
    double hurst = 0.5;
    double T = 1.0;
    std::vector<std::size_t> eps_m;  // eps = m * mesh, strictly decreasing
    std::size_t replicas = 1000;
    std::uint64_t base_seed = 1;
    GridSpec grid;
    GenMethod method = GenMethod::CirculantEmbedding;
    double significance = 0.01;
    bool keep_samples = false;

    void validate() const;
};

struct SampleRow {
    std::size_t replica;
    std::uint64_t seed;
    double raw;
    double normalized;
};

struct PerEpsStats {
    double eps = 0.0;
    std::size_t m = 0;
    MomentSummary raw;
    MomentSummary normalized;
    double normalized_variance = 0.0;
    double exact_second_moment = 0.0;
    std::optional<StatTestResult> ks;  // Gaussian / critical regimes only
    std::vector<SampleRow> samples;    // when config.keep_samples
};

struct Verdict {
    std::string criterion;
    bool pass = false;
    std::string detail;
};

struct ExperimentReport {
    ExperimentConfig config;
    LimitPrediction prediction;
    std::vector<PerEpsStats> per_eps;
    std::optional<RegressionResult> regression;
    std::vector<Verdict> verdicts;
    double wall_time_seconds = 0.0;

    bool all_passed() const;
    // Schema: top-level keys config, per_eps, prediction, regression,
    // verdicts, wall_time_seconds.
    std::string to_json(int indent = 2) const;
};

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const QuadratureSpec& spec = {});

// Writes per-eps sample rows as CSV `replica,seed,raw,normalized`.
void dump_samples_csv(const PerEpsStats& stats, const std::string& filename);

// JSON round-trip of the experiment config (the CLI's --config schema).
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

// Monte Carlo bound on the contraction norm:
//   A_eps = eps int_{[-T/eps,T/eps]^3} |rho(x)|^r |rho(y)|^r |rho(z)|^{k-r}
//           |rho(y+z-x)|^{k-r} dx dy dz,
// estimated by importance sampling with per-coordinate proposal
// (1+|u|)^{2H-2}.  Requires the Gaussian regime H < 1 - 1/(2k).
struct ContractionEstimate {
    double eps = 0.0;
    double value = 0.0;
    double std_error = 0.0;
    std::size_t points = 0;
    bool se_within_target = true;  // SE <= 5% of the estimate
};
ContractionEstimate contraction_norm_bound(const Hurst& H, int k, int r,
                                           double T, double eps,
                                           std::size_t mc_points,
                                           std::uint64_t seed);

// Characteristic-function report for the mixed-Gaussian regime of the
// tilde functional (H < 1/2): empirical CF of the normalized samples next
// to E[exp(-lambda^2 S^2/2)] evaluated with both the closed-form (0) and
// the truncated value of the half-line rho integral.  No verdict is
// attached; the two columns are reported side by side.
struct MixedCfRow {
    double lambda = 0.0;
    double empirical_cf = 0.0;
    double empirical_se = 0.0;
    double printed_target = 1.0;
    double truncated_target = 1.0;
};
std::vector<MixedCfRow> mixed_limit_cf_test(const Hurst& H, double T,
                                            const GridSpec& grid,
                                            std::size_t eps_m,
                                            const std::vector<double>& lambdas,
                                            std::size_t replicas,
                                            std::uint64_t base_seed,
                                            GenMethod method,
                                            const QuadratureSpec& spec = {});

// Worker pool: HERMITE_LIMITS_THREADS caps the thread count (default:
// hardware concurrency).  Results never depend on the thread count.
std::size_t worker_threads();
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Parses eps tokens like "2^-8" or "0.00390625" to a value.
double parse_eps_token(const std::string& token);

}  // namespace hlim

#include "hlim/mc_lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hlim/kernels.hpp"
#include "hlim/rng.hpp"

namespace hlim {

std::size_t worker_threads() {
    if (const char* env = std::getenv("HERMITE_LIMITS_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1 && v <= 1024)
            return static_cast<std::size_t>(v);
        std::fprintf(stderr,
                     "warning: ignoring invalid HERMITE_LIMITS_THREADS=%s\n",
                     env);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t nthreads = std::min(worker_threads(), std::max<std::size_t>(n, 1));
    if (nthreads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

// Pairwise reduction with Neumaier leaves; summation order is a pure
// function of the index range, so replica order and thread count never
// change the result.
template <class F>
double pairwise_map_sum(const double* a, std::size_t n, F&& f) {
    if (n <= 256) {
        double s = 0.0, c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double x = f(a[i]);
            double t = s + x;
            if (std::abs(s) >= std::abs(x))
                c += (s - t) + x;
            else
                c += (x - t) + s;
            s = t;
        }
        return s + c;
    }
    std::size_t half = n / 2;
    return pairwise_map_sum(a, half, f) + pairwise_map_sum(a + half, n - half, f);
}

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

double factorial(int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

}  // namespace

MomentSummary summarize_moments(const std::vector<double>& xs) {
    MomentSummary s;
    s.n = xs.size();
    if (s.n == 0) return s;
    const double* a = xs.data();
    const double nd = static_cast<double>(s.n);
    s.mean = pairwise_map_sum(a, s.n, [](double x) { return x; }) / nd;
    const double mu = s.mean;
    double m2c = pairwise_map_sum(a, s.n,
                                  [mu](double x) { return sqr(x - mu); }) / nd;
    double m4c = pairwise_map_sum(a, s.n, [mu](double x) {
                     return sqr(sqr(x - mu));
                 }) / nd;
    double m2u = pairwise_map_sum(a, s.n, [](double x) { return x * x; }) / nd;
    double m4u = pairwise_map_sum(a, s.n, [](double x) {
                     return sqr(x * x);
                 }) / nd;
    s.second_moment = m2u;
    s.variance = s.n > 1 ? m2c * nd / (nd - 1.0) : 0.0;
    s.se_mean = std::sqrt(std::max(0.0, s.variance / nd));
    s.se_variance = std::sqrt(std::max(0.0, (m4c - sqr(m2c)) / nd));
    s.se_second_moment = std::sqrt(std::max(0.0, (m4u - sqr(m2u)) / nd));
    return s;
}

StatTestResult ks_normal_test(const std::vector<double>& samples,
                              double sigma2) {
    if (samples.empty())
        throw std::domain_error("ks_normal_test: empty sample list");
    if (!(sigma2 > 0.0))
        throw std::domain_error("ks_normal_test: sigma2 must be positive");

    std::vector<double> xs = samples;
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    const double inv_sigma = 1.0 / std::sqrt(sigma2);
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double z = normal_cdf(xs[i] * inv_sigma);
        d = std::max(d, (i + 1.0) / n - z);
        d = std::max(d, z - static_cast<double>(i) / n);
    }

    // Asymptotic Kolmogorov distribution, series truncated at 100 terms.
    const double t = std::sqrt(n) * d;
    double p;
    if (t < 0.05) {
        p = 1.0;
    } else {
        double sum = 0.0;
        for (int j = 1; j <= 100; ++j) {
            double term = std::exp(-2.0 * sqr(static_cast<double>(j) * t));
            sum += (j % 2 == 1) ? term : -term;
        }
        p = std::clamp(2.0 * sum, 0.0, 1.0);
    }
    return {d, p, xs.size(), xs.size() < 100};
}

RegressionResult variance_scaling_regression(
    const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3)
        throw std::domain_error("regression needs at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (auto [e, v] : points) {
        if (!(e > 0.0) || !(v > 0.0))
            throw std::domain_error("regression needs positive eps and variance");
        double x = std::log(e), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double n = static_cast<double>(points.size());
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    const double cxy = sxy - sx * sy / n;
    RegressionResult r;
    r.slope = cxy / vx;
    r.intercept = (sy - r.slope * sx) / n;
    r.r2 = vy > 0.0 ? sqr(cxy) / (vx * vy) : 1.0;
    return r;
}

void ExperimentConfig::validate() const {
    Hurst H(hurst);
    if (!(T > 0.0)) throw std::invalid_argument("config: T must be positive");
    grid.validate();
    if (eps_m.empty()) throw std::invalid_argument("config: empty eps grid");
    for (std::size_t i = 0; i < eps_m.size(); ++i) {
        if (eps_m[i] < 1) throw std::invalid_argument("config: eps m >= 1");
        if (i > 0 && eps_m[i] >= eps_m[i - 1])
            throw std::invalid_argument(
                "config: eps grid must be strictly decreasing");
    }
    aligned_steps(grid, T, eps_m.front());
    if (replicas < 2) throw std::invalid_argument("config: replicas >= 2");
    const Regime regime = classify_regime(kind, H);
    if ((regime == Regime::GaussianCLT || regime == Regime::CriticalLog) &&
        replicas < 100)
        throw std::invalid_argument(
            "config: distributional tests require replicas >= 100");
    if (!(significance > 0.0) || !(significance < 1.0))
        throw std::invalid_argument("config: significance in (0,1)");
}

bool ExperimentReport::all_passed() const {
    for (const auto& v : verdicts)
        if (!v.pass) return false;
    return true;
}

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const QuadratureSpec& spec) {
    const auto t_start = std::chrono::steady_clock::now();
    config.validate();
    const Hurst H(config.hurst);
    const std::size_t ne = config.eps_m.size();
    const std::size_t nr = config.replicas;

    ExperimentReport rep;
    rep.config = config;
    rep.prediction = limit_prediction(config.kind, H, config.T, spec);
    const Regime regime = rep.prediction.regime;

    // One path (or pair) per replica, evaluated at every eps.
    std::vector<std::vector<double>> raw(ne, std::vector<double>(nr));
    std::vector<std::vector<double>> norm(ne, std::vector<double>(nr));
    std::vector<std::uint64_t> seeds(nr);

    parallel_for(nr, [&](std::size_t i) {
        const std::uint64_t s = replica_seed(config.base_seed, 0, i);
        seeds[i] = s;
        if (config.kind.family == Family::HermiteVariation) {
            FbmPath path = build_path(H, config.grid, s, config.method);
            for (std::size_t e = 0; e < ne; ++e) {
                auto fs = hermite_variation(path, config.kind.k, config.T,
                                            EpsSpec{config.eps_m[e]});
                raw[e][i] = fs.raw_value;
                norm[e][i] = fs.normalized_value;
            }
        } else {
            PathPair pair = build_path_pair(H, config.grid, s, config.method);
            for (std::size_t e = 0; e < ne; ++e) {
                auto fs = bilinear_functional(pair, config.kind, config.T,
                                              EpsSpec{config.eps_m[e]});
                raw[e][i] = fs.raw_value;
                norm[e][i] = fs.normalized_value;
            }
        }
    });

    for (std::size_t e = 0; e < ne; ++e) {
        PerEpsStats st;
        st.m = config.eps_m[e];
        st.eps = EpsSpec{st.m}.eps(config.grid);
        st.raw = summarize_moments(raw[e]);
        st.normalized = summarize_moments(norm[e]);
        st.normalized_variance = st.normalized.variance;
        st.exact_second_moment = second_moment_exact(
            config.kind, H, config.T, st.eps, st.eps, spec);
        if (regime == Regime::GaussianCLT || regime == Regime::CriticalLog)
            st.ks = ks_normal_test(norm[e], rep.prediction.limit_constant);
        if (config.keep_samples) {
            st.samples.resize(nr);
            for (std::size_t i = 0; i < nr; ++i)
                st.samples[i] = {i, seeds[i], raw[e][i], norm[e][i]};
        }
        rep.per_eps.push_back(std::move(st));
    }

    // Theorem-free workhorse verdict: MC second moment vs quadrature.
    for (const auto& st : rep.per_eps) {
        std::ostringstream name, detail;
        name << "exact_moment_eps_" << st.eps;
        const double gap = std::abs(st.raw.second_moment -
                                    st.exact_second_moment);
        const bool ok = gap <= 3.0 * st.raw.se_second_moment;
        detail << "mc=" << st.raw.second_moment
               << " exact=" << st.exact_second_moment
               << " |gap|=" << gap << " 3se=" << 3.0 * st.raw.se_second_moment;
        rep.verdicts.push_back({name.str(), ok, detail.str()});
    }

    const PerEpsStats& finest = rep.per_eps.back();
    if (regime == Regime::GaussianCLT) {
        const double c = rep.prediction.limit_constant;
        {
            // 10% band, widened to 3 SE when the replica count makes the
            // estimator noisier than the band itself.
            const double tol =
                std::max(0.10 * c, 3.0 * finest.normalized.se_variance);
            std::ostringstream detail;
            detail << "normalized variance " << finest.normalized_variance
                   << " vs limit " << c << " (tol " << tol << ")";
            rep.verdicts.push_back(
                {"normalized_variance_within_10pct",
                 std::abs(finest.normalized_variance - c) <= tol,
                 detail.str()});
        }
        {
            std::ostringstream detail;
            detail << "KS D=" << finest.ks->statistic
                   << " p=" << finest.ks->p_value << " at significance "
                   << config.significance;
            rep.verdicts.push_back({"ks_normality",
                                    finest.ks->p_value > config.significance,
                                    detail.str()});
        }
    } else if (regime == Regime::CriticalLog) {
        if (ne >= 3) {
            bool monotone = true;
            for (std::size_t e = 2; e < ne; ++e) {
                double d1 = rep.per_eps[e - 1].normalized_variance -
                            rep.per_eps[e - 2].normalized_variance;
                double d2 = rep.per_eps[e].normalized_variance -
                            rep.per_eps[e - 1].normalized_variance;
                if (d1 * d2 < 0.0) monotone = false;
            }
            const double c = rep.prediction.limit_constant;
            const double fin = finest.normalized_variance;
            std::ostringstream detail;
            detail << "Var/log(1/eps) trend to " << c << ", final " << fin;
            rep.verdicts.push_back(
                {"critical_trend",
                 monotone && std::abs(fin - c) <= 0.15 * c, detail.str()});
        }
    } else if (regime == Regime::L2Limit) {
        const double chaos_factor =
            config.kind.family == Family::HermiteVariation
                ? factorial(config.kind.k)
                : 1.0;
        const double limit_target =
            chaos_factor * rep.prediction.limit_constant;
        const double tol = std::max(0.10 * finest.exact_second_moment,
                                    3.0 * finest.raw.se_second_moment);
        std::ostringstream detail;
        detail << "mc=" << finest.raw.second_moment
               << " exact(eps)=" << finest.exact_second_moment
               << " limit=" << limit_target << " (tol " << tol << ")";
        rep.verdicts.push_back(
            {"l2_second_moment_within_10pct",
             std::abs(finest.raw.second_moment - finest.exact_second_moment) <=
                 tol,
             detail.str()});
    }

    if (ne >= 3) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& st : rep.per_eps)
            pts.emplace_back(st.eps, st.raw.variance);
        rep.regression = variance_scaling_regression(pts);
    }

    rep.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    return rep;
}

namespace {

nlohmann::json kind_to_json(const FunctionalKind& kind) {
    nlohmann::json j;
    switch (kind.family) {
        case Family::HermiteVariation: j["family"] = "hermite"; break;
        case Family::Tilde: j["family"] = "tilde"; break;
        case Family::Breve: j["family"] = "breve"; break;
        case Family::Hat: j["family"] = "hat"; break;
    }
    j["k"] = kind.k;
    return j;
}

FunctionalKind kind_from_json(const nlohmann::json& j) {
    std::string family = j.at("family").get<std::string>();
    if (family == "hermite")
        return FunctionalKind::hermite(j.value("k", 2));
    if (family == "tilde") return FunctionalKind::tilde();
    if (family == "breve") return FunctionalKind::breve();
    if (family == "hat") return FunctionalKind::hat();
    throw std::invalid_argument("unknown functional family: " + family);
}

nlohmann::json config_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["kind"] = kind_to_json(c.kind);
    j["hurst"] = c.hurst;
    j["T"] = c.T;
    j["eps_m"] = c.eps_m;
    std::vector<double> eps;
    for (auto m : c.eps_m) eps.push_back(EpsSpec{m}.eps(c.grid));
    j["eps"] = eps;
    j["replicas"] = c.replicas;
    j["base_seed"] = c.base_seed;
    j["grid"] = {{"n", c.grid.n}, {"T_total", c.grid.T_total}};
    j["method"] = method_name(c.method);
    j["significance"] = c.significance;
    return j;
}

}  // namespace

std::string ExperimentReport::to_json(int indent) const {
    nlohmann::json j;
    j["config"] = config_json(config);
    j["prediction"] = {
        {"kind", kind_to_json(config.kind)},
        {"regime", regime_name(prediction.regime)},
        {"limit_constant", prediction.limit_constant},
        {"normalization",
         prediction.log_normalization
             ? nlohmann::json("log")
             : nlohmann::json(prediction.normalization_exponent)},
        {"t_exponent", prediction.t_exponent},
        {"note", prediction.threshold_note},
    };
    j["per_eps"] = nlohmann::json::array();
    for (const auto& st : per_eps) {
        nlohmann::json je = {
            {"eps", st.eps},
            {"m", st.m},
            {"mean", st.raw.mean},
            {"variance", st.raw.variance},
            {"second_moment", st.raw.second_moment},
            {"std_error", st.raw.se_mean},
            {"second_moment_se", st.raw.se_second_moment},
            {"normalized_variance", st.normalized_variance},
            {"normalized_variance_se", st.normalized.se_variance},
            {"exact_second_moment", st.exact_second_moment},
        };
        if (st.ks) {
            je["ks_statistic"] = st.ks->statistic;
            je["p_value"] = st.ks->p_value;
        }
        j["per_eps"].push_back(je);
    }
    if (regression) {
        j["regression"] = {{"slope", regression->slope},
                           {"intercept", regression->intercept},
                           {"r2", regression->r2}};
    } else {
        j["regression"] = nullptr;
    }
    j["verdicts"] = nlohmann::json::array();
    for (const auto& v : verdicts)
        j["verdicts"].push_back(
            {{"criterion", v.criterion}, {"pass", v.pass}, {"detail", v.detail}});
    j["wall_time_seconds"] = wall_time_seconds;
    return j.dump(indent);
}

ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig c;
    c.kind = kind_from_json(j.at("kind"));
    c.hurst = j.at("hurst").get<double>();
    c.T = j.value("T", 1.0);
    c.grid.n = j.at("grid").at("n").get<std::size_t>();
    c.grid.T_total = j.at("grid").at("T_total").get<double>();
    const double delta = c.grid.mesh();
    if (j.contains("eps_m")) {
        c.eps_m = j.at("eps_m").get<std::vector<std::size_t>>();
    } else {
        for (const auto& tok : j.at("eps")) {
            double eps = tok.is_string()
                             ? parse_eps_token(tok.get<std::string>())
                             : tok.get<double>();
            double m = eps / delta;
            if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, m) ||
                m < 1.0)
                throw std::invalid_argument(
                    "eps is not an integer multiple of the mesh");
            c.eps_m.push_back(static_cast<std::size_t>(std::round(m)));
        }
    }
    c.replicas = j.at("replicas").get<std::size_t>();
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
    c.method = parse_method(j.value("method", std::string("circulant")));
    c.significance = j.value("significance", 0.01);
    c.keep_samples = j.value("keep_samples", false);
    return c;
}

std::string config_to_json(const ExperimentConfig& config, int indent) {
    return config_json(config).dump(indent);
}

void dump_samples_csv(const PerEpsStats& stats, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw std::runtime_error("cannot open " + filename);
    out << "replica,seed,raw,normalized\n";
    char line[128];
    for (const auto& row : stats.samples) {
        std::snprintf(line, sizeof line, "%zu,%llu,%.17g,%.17g\n", row.replica,
                      static_cast<unsigned long long>(row.seed), row.raw,
                      row.normalized);
        out << line;
    }
}

ContractionEstimate contraction_norm_bound(const Hurst& H, int k, int r,
                                           double T, double eps,
                                           std::size_t mc_points,
                                           std::uint64_t seed) {
    if (k < 2) throw std::domain_error("contraction bound requires k >= 2");
    if (r < 1 || r > k - 1)
        throw std::domain_error("contraction order r must lie in [1, k-1]");
    if (!H.is_clt(k)) {
        std::ostringstream os;
        os << "contraction decay is asserted in the Gaussian regime "
              "H < 1-1/(2k) = "
           << Hurst::hermite_threshold(k) << ", got H = " << H.value();
        throw std::domain_error(os.str());
    }
    if (!(T > 0.0) || !(eps > 0.0) || mc_points < 100)
        throw std::domain_error("contraction bound: bad T, eps or points");

    const double R = T / eps;
    const double h = H.value();
    const double p = 2.0 * h - 2.0;  // proposal exponent
    const double q = p + 1.0;        // 2H-1
    const bool log_case = std::abs(q) < 1e-14;
    const double one_sided =
        log_case ? std::log1p(R) : (std::pow(1.0 + R, q) - 1.0) / q;
    const double z_norm = 2.0 * one_sided;  // two-sided proposal mass

    // Inverse CDF of the one-sided magnitude density (1+u)^p / one_sided.
    auto sample_mag = [&](double v) {
        if (log_case) return std::expm1(v * std::log1p(R));
        return std::pow(1.0 + v * (std::pow(1.0 + R, q) - 1.0), 1.0 / q) - 1.0;
    };

    const int er = r, ekr = k - r;
    auto abs_rho_pow = [&](double x, int e) {
        return ipow(std::abs(rho(H, x)), e);
    };

    const std::size_t block = 4096;
    const std::size_t nblocks = (mc_points + block - 1) / block;
    std::vector<double> bsum(nblocks, 0.0), bsum2(nblocks, 0.0);

    parallel_for(nblocks, [&](std::size_t bi) {
        double s = 0.0, s2 = 0.0;
        const std::size_t lo = bi * block;
        const std::size_t hi = std::min(mc_points, lo + block);
        for (std::size_t i = lo; i < hi; ++i) {
            double coord[3];
            double gdens = 1.0;
            for (int c = 0; c < 3; ++c) {
                double v = rng_uniform(seed, 6 * i + 2 * c);
                double sgn = rng_uniform(seed, 6 * i + 2 * c + 1) < 0.5 ? -1.0
                                                                        : 1.0;
                double mag = sample_mag(v);
                coord[c] = sgn * mag;
                gdens *= std::pow(1.0 + mag, p) / z_norm;
            }
            const double x = coord[0], y = coord[1], z = coord[2];
            const double w = abs_rho_pow(x, er) * abs_rho_pow(y, er) *
                             abs_rho_pow(z, ekr) *
                             abs_rho_pow(y + z - x, ekr) / gdens;
            s += w;
            s2 += w * w;
        }
        bsum[bi] = s;
        bsum2[bi] = s2;
    });

    double total = 0.0, total2 = 0.0;
    for (std::size_t bi = 0; bi < nblocks; ++bi) {
        total += bsum[bi];
        total2 += bsum2[bi];
    }
    const double nd = static_cast<double>(mc_points);
    const double mean = total / nd;
    const double var = std::max(0.0, total2 / nd - mean * mean);
    ContractionEstimate est;
    est.eps = eps;
    est.value = eps * mean;
    est.std_error = eps * std::sqrt(var / nd);
    est.points = mc_points;
    est.se_within_target = est.std_error <= 0.05 * std::abs(est.value);
    return est;
}

std::vector<MixedCfRow> mixed_limit_cf_test(const Hurst& H, double T,
                                            const GridSpec& grid,
                                            std::size_t eps_m,
                                            const std::vector<double>& lambdas,
                                            std::size_t replicas,
                                            std::uint64_t base_seed,
                                            GenMethod method,
                                            const QuadratureSpec& spec) {
    if (!H.below(0.5))
        throw std::domain_error(
            "mixed-Gaussian characteristic function report requires H < 1/2");
    if (replicas < 2) throw std::domain_error("need at least 2 replicas");

    const std::size_t L = aligned_steps(grid, T, eps_m);
    const double delta = grid.mesh();
    std::vector<double> samples(replicas), quad_b1(replicas);

    parallel_for(replicas, [&](std::size_t i) {
        const std::uint64_t s = replica_seed(base_seed, 0, i);
        PathPair pair = build_path_pair(H, grid, s, method);
        auto fs = bilinear_functional(pair, FunctionalKind::tilde(), T,
                                      EpsSpec{eps_m});
        samples[i] = fs.normalized_value;
        quad_b1[i] =
            delta * kernels::sum_sq(pair.first.values.data(), L);
    });

    const HalfLineRho hl = tilde_rho_half_line(H, spec);
    std::vector<MixedCfRow> rows;
    for (double lam : lambdas) {
        MixedCfRow row;
        row.lambda = lam;
        std::vector<double> cosv(replicas);
        for (std::size_t i = 0; i < replicas; ++i)
            cosv[i] = std::cos(lam * samples[i]);
        auto ms = summarize_moments(cosv);
        row.empirical_cf = ms.mean;
        row.empirical_se = ms.se_mean;
        double printed = 0.0, trunc = 0.0;
        for (std::size_t i = 0; i < replicas; ++i) {
            printed += std::exp(-lam * lam * hl.closed_form_limit * quad_b1[i]);
            trunc += std::exp(-lam * lam * hl.truncated_quadrature * quad_b1[i]);
        }
        row.printed_target = printed / static_cast<double>(replicas);
        row.truncated_target = trunc / static_cast<double>(replicas);
        rows.push_back(row);
    }
    return rows;
}

double parse_eps_token(const std::string& token) {
    auto caret = token.find('^');
    if (caret != std::string::npos) {
        double base = std::stod(token.substr(0, caret));
        int expo = std::stoi(token.substr(caret + 1));
        return std::pow(base, expo);
    }
    return std::stod(token);
}

}  // namespace hlim

// hermite-limits: command-line front end of the fractional-Brownian
// limit-theorem laboratory.
//
// Exit codes: 0 success, 1 validation error, 2 numeric failure,
// 3 verdict failure (an acceptance-style check did not hold).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hlim/core_math.hpp"
#include "hlim/functionals.hpp"
#include "hlim/mc_lab.hpp"
#include "hlim/path_engine.hpp"
#include "hlim/rng.hpp"
#include "hlim/white_noise.hpp"

using nlohmann::json;

namespace {

hlim::FunctionalKind parse_kind(const std::string& name, int k) {
    if (name == "hermite") return hlim::FunctionalKind::hermite(k);
    if (name == "tilde") return hlim::FunctionalKind::tilde();
    if (name == "breve") return hlim::FunctionalKind::breve();
    if (name == "hat") return hlim::FunctionalKind::hat();
    throw std::invalid_argument("unknown kind: " + name +
                                " (expected hermite|tilde|breve|hat)");
}

std::vector<double> parse_eps_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(hlim::parse_eps_token(tok));
    }
    if (out.empty()) throw std::invalid_argument("empty eps list");
    return out;
}

std::size_t eps_to_m(double eps, const hlim::GridSpec& grid) {
    const double m = eps / grid.mesh();
    if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, m) || m < 1.0)
        throw std::invalid_argument(
            "eps = " + std::to_string(eps) +
            " is not an integer multiple of the mesh " +
            std::to_string(grid.mesh()));
    return static_cast<std::size_t>(std::round(m));
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path);
    out << text << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "hermite-limits: exact fractional Gaussian path synthesis, the four "
        "increment functionals, their limiting constants, and statistical "
        "verification of the Gaussian / critical-log / L2 convergence "
        "regimes.  HERMITE_LIMITS_THREADS caps worker parallelism."};
    app.require_subcommand(1);

    // ---- constants ----------------------------------------------------
    std::string c_kind = "hermite";
    int c_k = 2;
    double c_hurst = 0.5, c_T = 1.0, c_cutoff = 50.0;
    auto* c_cmd = app.add_subcommand(
        "constants",
        "Regime classification, normalization exponent and limiting "
        "constant (CLT variance, critical-log constant or L2 second "
        "moment) for a functional at (H, k, T)");
    c_cmd->add_option("--kind", c_kind, "hermite|tilde|breve|hat")->required();
    c_cmd->add_option("--hurst", c_hurst, "Hurst index in (0,1)")->required();
    c_cmd->add_option("--k", c_k, "Hermite order (k >= 2)");
    c_cmd->add_option("--T", c_T, "horizon");
    c_cmd->add_option("--tail-cutoff", c_cutoff, "quadrature tail cutoff A");

    // ---- paths ---------------------------------------------------------
    double p_hurst = 0.5, p_Ttotal = 1.0;
    std::size_t p_n = 1024;
    std::uint64_t p_seed = 1;
    std::string p_method = "circulant", p_out, p_format = "csv";
    bool p_pair = false;
    auto* p_cmd = app.add_subcommand(
        "paths",
        "Exact fractional Brownian path synthesis (circulant embedding or "
        "Cholesky oracle), dumped as CSV `t,value` or binary with a "
        "32-byte header");
    p_cmd->add_option("--hurst", p_hurst)->required();
    p_cmd->add_option("--n", p_n, "grid steps")->required();
    p_cmd->add_option("--T-total", p_Ttotal, "grid horizon");
    p_cmd->add_option("--seed", p_seed);
    p_cmd->add_option("--method", p_method, "circulant|cholesky");
    p_cmd->add_flag("--pair", p_pair, "two independent paths");
    p_cmd->add_option("--out", p_out, "output file")->required();
    p_cmd->add_option("--format", p_format, "csv|bin");

    // ---- experiment ----------------------------------------------------
    std::string e_config, e_kind = "hermite", e_eps = "2^-6,2^-8", e_out;
    std::string e_method = "circulant", e_dump_dir;
    int e_k = 2;
    double e_hurst = 0.3, e_T = 1.0, e_Ttotal = 0.0, e_signif = 0.01;
    std::size_t e_replicas = 1000, e_n = 0;
    std::uint64_t e_seed = 20240801;
    auto* e_cmd = app.add_subcommand(
        "experiment",
        "Monte Carlo verification run: replicas of the functional across an "
        "eps grid, exact-moment oracle comparison, KS normality where the "
        "regime predicts a Gaussian law, scaling regression, verdicts");
    e_cmd->add_option("--config", e_config, "JSON config file");
    e_cmd->add_option("--kind", e_kind, "hermite|tilde|breve|hat");
    e_cmd->add_option("--k", e_k);
    e_cmd->add_option("--hurst", e_hurst);
    e_cmd->add_option("--T", e_T);
    e_cmd->add_option("--eps", e_eps, "comma list, 2^-k tokens accepted");
    e_cmd->add_option("--replicas", e_replicas);
    e_cmd->add_option("--seed", e_seed);
    e_cmd->add_option("--n", e_n, "grid steps (default: chosen from eps)");
    e_cmd->add_option("--T-total", e_Ttotal, "grid horizon (default T+eps)");
    e_cmd->add_option("--method", e_method);
    e_cmd->add_option("--significance", e_signif);
    e_cmd->add_option("--out", e_out, "report file (default stdout)");
    e_cmd->add_option("--dump-dir", e_dump_dir, "per-eps sample CSVs");

    // ---- identity --------------------------------------------------------
    std::string i_which;
    double i_hurst = 0.5, i_u = 0.2, i_eps = 0.1, i_s = 0.3, i_r = 0.7;
    double i_T = 1.0, i_Ttotal = 1.0625;
    std::size_t i_n = 1088, i_m = 16;
    std::uint64_t i_seed = 7;
    std::string i_xi = "0,1,2,3";
    auto* i_cmd = app.add_subcommand(
        "identity",
        "Residuals of the kernel identities: `e7` (increment S-transform "
        "vs the K+ integral), `kernel-product` (kernel derivative product "
        "vs H(2H-1)(r-s)^{2H-2}), `hat-decomposition` (pathwise half "
        "difference of order-2 variations)");
    i_cmd->add_option("--which", i_which, "e7|kernel-product|hat-decomposition")
        ->required();
    i_cmd->add_option("--hurst", i_hurst)->required();
    i_cmd->add_option("--u", i_u, "e7: left endpoint");
    i_cmd->add_option("--eps", i_eps, "e7: increment width");
    i_cmd->add_option("--xi", i_xi, "e7: Hermite-function indices");
    i_cmd->add_option("--s", i_s, "kernel-product: s < r");
    i_cmd->add_option("--r", i_r, "kernel-product: r");
    i_cmd->add_option("--seed", i_seed, "hat-decomposition: base seed");
    i_cmd->add_option("--n", i_n, "hat-decomposition: grid steps");
    i_cmd->add_option("--T-total", i_Ttotal, "hat-decomposition: grid horizon");
    i_cmd->add_option("--T", i_T, "hat-decomposition: horizon");
    i_cmd->add_option("--m", i_m, "hat-decomposition: eps in mesh units");

    // ---- stransform ------------------------------------------------------
    std::string s_kind = "hermite", s_eps = "2^-2,2^-4,2^-6";
    int s_k = 2, s_xi = 1;
    double s_hurst = 0.6, s_T = 1.0;
    auto* s_cmd = app.add_subcommand(
        "stransform",
        "Finite-eps S-transform of a functional against its limit "
        "expression (K+ based), tabulated over an eps list");
    s_cmd->add_option("--kind", s_kind);
    s_cmd->add_option("--hurst", s_hurst)->required();
    s_cmd->add_option("--k", s_k);
    s_cmd->add_option("--xi", s_xi, "Hermite-function index");
    s_cmd->add_option("--T", s_T);
    s_cmd->add_option("--eps-list", s_eps);

    // ---- contraction -----------------------------------------------------
    double x_hurst = 0.6, x_T = 1.0;
    int x_k = 2, x_r = 1;
    std::string x_eps = "2^-3,2^-4,2^-5,2^-6,2^-7";
    std::size_t x_points = 2000000;
    std::uint64_t x_seed = 99;
    auto* x_cmd = app.add_subcommand(
        "contraction",
        "Monte Carlo estimate of the contraction-norm bound A_eps whose "
        "decay certifies the fourth-moment criterion in the Gaussian "
        "regime");
    x_cmd->add_option("--hurst", x_hurst)->required();
    x_cmd->add_option("--k", x_k);
    x_cmd->add_option("--r", x_r);
    x_cmd->add_option("--T", x_T);
    x_cmd->add_option("--eps-list", x_eps);
    x_cmd->add_option("--points", x_points);
    x_cmd->add_option("--seed", x_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand(c_cmd)) {
            hlim::QuadratureSpec spec;
            spec.tail_cutoff = c_cutoff;
            auto kind = parse_kind(c_kind, c_k);
            auto lp = hlim::limit_prediction(kind, hlim::Hurst(c_hurst), c_T,
                                             spec);
            json j;
            j["kind"] = c_kind;
            j["k"] = kind.k;
            j["hurst"] = c_hurst;
            j["T"] = c_T;
            j["regime"] = hlim::regime_name(lp.regime);
            j["constant"] = lp.limit_constant;
            j["t_exponent"] = lp.t_exponent;
            j["normalization"] = lp.log_normalization
                                     ? json("log")
                                     : json(lp.normalization_exponent);
            j["note"] = lp.threshold_note;
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (app.got_subcommand(p_cmd)) {
            hlim::GridSpec grid{p_Ttotal, p_n};
            auto method = hlim::parse_method(p_method);
            auto write = [&](const hlim::FbmPath& path,
                             const std::string& file) {
                if (p_format == "csv")
                    hlim::dump_path_csv(path, file);
                else if (p_format == "bin")
                    hlim::dump_path_binary(path, file);
                else
                    throw std::invalid_argument("format must be csv or bin");
            };
            if (p_pair) {
                auto pair = hlim::build_path_pair(hlim::Hurst(p_hurst), grid,
                                                  p_seed, method);
                write(pair.first, p_out + ".1");
                write(pair.second, p_out + ".2");
                std::cerr << "wrote " << p_out << ".1 and " << p_out << ".2\n";
            } else {
                auto path = hlim::build_path(hlim::Hurst(p_hurst), grid,
                                             p_seed, method);
                write(path, p_out);
                std::cerr << "wrote " << p_out << "\n";
            }
            return 0;
        }

        if (app.got_subcommand(e_cmd)) {
            hlim::ExperimentConfig config;
            if (!e_config.empty()) {
                std::ifstream in(e_config);
                if (!in)
                    throw std::invalid_argument("cannot read " + e_config);
                std::stringstream ss;
                ss << in.rdbuf();
                config = hlim::config_from_json(ss.str());
            } else {
                config.kind = parse_kind(e_kind, e_k);
                config.hurst = e_hurst;
                config.T = e_T;
                config.replicas = e_replicas;
                config.base_seed = e_seed;
                config.method = hlim::parse_method(e_method);
                config.significance = e_signif;
                auto eps = parse_eps_list(e_eps);
                double eps_max = *std::max_element(eps.begin(), eps.end());
                double eps_min = *std::min_element(eps.begin(), eps.end());
                if (e_n == 0 || e_Ttotal == 0.0) {
                    // default grid: mesh = eps_min/16, horizon T + eps_max
                    double mesh = eps_min / 16.0;
                    config.grid.T_total = e_T + eps_max;
                    config.grid.n = static_cast<std::size_t>(
                        std::round(config.grid.T_total / mesh));
                } else {
                    config.grid = hlim::GridSpec{e_Ttotal, e_n};
                }
                for (double v : eps)
                    config.eps_m.push_back(eps_to_m(v, config.grid));
                std::sort(config.eps_m.rbegin(), config.eps_m.rend());
            }
            config.keep_samples = !e_dump_dir.empty();
            auto report = hlim::run_experiment(config);
            emit(report.to_json(), e_out);
            if (!e_dump_dir.empty()) {
                for (const auto& st : report.per_eps) {
                    std::ostringstream name;
                    name << e_dump_dir << "/samples_m" << st.m << ".csv";
                    hlim::dump_samples_csv(st, name.str());
                }
            }
            return report.all_passed() ? 0 : 3;
        }

        if (app.got_subcommand(i_cmd)) {
            json rows = json::array();
            bool ok = true;
            if (i_which == "e7") {
                hlim::KernelContext ctx{hlim::Hurst(i_hurst)};
                std::stringstream ss(i_xi);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    int n = std::stoi(tok);
                    auto xi = hlim::TestFunction::hermite(n);
                    double res =
                        ctx.increment_identity_residual(xi, i_u, i_eps);
                    ok = ok && res < 1e-6;
                    rows.push_back({{"which", "e7"},
                                    {"hurst", i_hurst},
                                    {"u", i_u},
                                    {"eps", i_eps},
                                    {"xi", n},
                                    {"residual", res},
                                    {"threshold", 1e-6}});
                }
            } else if (i_which == "kernel-product") {
                hlim::KernelContext ctx{hlim::Hurst(i_hurst)};
                double res = ctx.kernel_product_residual(i_s, i_r);
                ok = res < 1e-4;
                rows.push_back({{"which", "kernel-product"},
                                {"hurst", i_hurst},
                                {"s", i_s},
                                {"r", i_r},
                                {"residual", res},
                                {"threshold", 1e-4}});
            } else if (i_which == "hat-decomposition") {
                hlim::GridSpec grid{i_Ttotal, i_n};
                auto beta = hlim::build_path(
                    hlim::Hurst(i_hurst), grid, hlim::derive_stream(i_seed, 1),
                    hlim::GenMethod::CirculantEmbedding);
                auto beta_t = hlim::build_path(
                    hlim::Hurst(i_hurst), grid, hlim::derive_stream(i_seed, 2),
                    hlim::GenMethod::CirculantEmbedding);
                double res = hlim::hat_decomposition_residual(
                    beta, beta_t, i_T, hlim::EpsSpec{i_m});
                ok = res < 1e-12;
                rows.push_back({{"which", "hat-decomposition"},
                                {"hurst", i_hurst},
                                {"seed", i_seed},
                                {"T", i_T},
                                {"eps", hlim::EpsSpec{i_m}.eps(grid)},
                                {"residual", res},
                                {"threshold", 1e-12}});
            } else {
                throw std::invalid_argument(
                    "unknown identity: " + i_which +
                    " (expected e7|kernel-product|hat-decomposition)");
            }
            std::cout << rows.dump(2) << "\n";
            return ok ? 0 : 3;
        }

        if (app.got_subcommand(s_cmd)) {
            hlim::KernelContext ctx{hlim::Hurst(s_hurst)};
            auto family = parse_kind(s_kind, std::max(s_k, 2)).family;
            auto xi = hlim::TestFunction::hermite(s_xi);
            double limit = ctx.s_transform(family, s_k, xi, s_T, 0.0);
            json rows = json::array();
            for (double eps : parse_eps_list(s_eps)) {
                double v = ctx.s_transform(family, s_k, xi, s_T, eps);
                rows.push_back({{"eps", eps},
                                {"value", v},
                                {"gap_to_limit", std::abs(v - limit)}});
            }
            rows.push_back(
                {{"eps", 0.0}, {"value", limit}, {"gap_to_limit", 0.0}});
            std::cout << rows.dump(2) << "\n";
            return 0;
        }

        if (app.got_subcommand(x_cmd)) {
            json rows = json::array();
            bool se_ok = true;
            for (double eps : parse_eps_list(x_eps)) {
                auto est = hlim::contraction_norm_bound(
                    hlim::Hurst(x_hurst), x_k, x_r, x_T, eps, x_points,
                    x_seed);
                se_ok = se_ok && est.se_within_target;
                rows.push_back({{"eps", est.eps},
                                {"value", est.value},
                                {"std_error", est.std_error},
                                {"points", est.points},
                                {"se_within_5pct", est.se_within_target}});
            }
            std::cout << rows.dump(2) << "\n";
            return se_ok ? 0 : 3;
        }
    } catch (const hlim::numeric_error& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

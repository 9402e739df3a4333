#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hlim/core_math.hpp"
#include "hlim/functionals.hpp"
#include "hlim/mc_lab.hpp"
#include "hlim/rng.hpp"

using namespace hlim;

namespace {

// Grid with delta = 2^-10 covering T = 1 plus eps up to 2^-4.
GridSpec test_grid() { return GridSpec{1088.0 / 1024.0, 1088}; }

FbmPath zero_path(const Hurst& H, const GridSpec& grid) {
    FbmPath p{H, grid, std::vector<double>(grid.n + 1, 0.0), 0,
              GenMethod::CirculantEmbedding};
    return p;
}

FbmPath scaled(const FbmPath& p, double lambda) {
    FbmPath q = p;
    for (auto& v : q.values) v *= lambda;
    return q;
}

}  // namespace

TEST_CASE("all-zero path anchors") {
    Hurst H(0.6);
    auto grid = test_grid();
    auto zp = zero_path(H, grid);
    EpsSpec es{64};  // eps = 2^-4
    const double eps = es.eps(grid);

    auto s2 = hermite_variation(zp, 2, 1.0, es);
    CHECK(s2.raw_value ==
          doctest::Approx(-std::pow(eps, -2.0 * (1.0 - 0.6)) * 1.0)
              .epsilon(1e-12));
    auto s3 = hermite_variation(zp, 3, 1.0, es);
    CHECK(s3.raw_value == 0.0);
    auto s5 = hermite_variation(zp, 5, 1.0, es);
    CHECK(s5.raw_value == 0.0);
}

TEST_CASE("bilinear functionals vanish when the first path is zero") {
    Hurst H(0.45);
    auto grid = test_grid();
    PathPair pair{zero_path(H, grid),
                  build_path(H, grid, 5, GenMethod::CirculantEmbedding)};
    EpsSpec es{16};
    CHECK(bilinear_functional(pair, FunctionalKind::tilde(), 1.0, es)
              .raw_value == 0.0);
    CHECK(bilinear_functional(pair, FunctionalKind::breve(), 1.0, es)
              .raw_value == 0.0);
}

TEST_CASE("hat is symmetric under swapping the pair") {
    Hurst H(0.55);
    auto grid = test_grid();
    auto pair = build_path_pair(H, grid, 77, GenMethod::CirculantEmbedding);
    PathPair swapped{pair.second, pair.first};
    EpsSpec es{16};
    CHECK(bilinear_functional(pair, FunctionalKind::hat(), 1.0, es).raw_value ==
          bilinear_functional(swapped, FunctionalKind::hat(), 1.0, es)
              .raw_value);
}

TEST_CASE("bilinearity in the first argument is exact for power-of-two scaling") {
    Hurst H(0.3);
    auto grid = test_grid();
    auto pair = build_path_pair(H, grid, 123, GenMethod::CirculantEmbedding);
    EpsSpec es{32};
    for (auto kind : {FunctionalKind::tilde(), FunctionalKind::breve()}) {
        double base = bilinear_functional(pair, kind, 1.0, es).raw_value;
        PathPair doubled{scaled(pair.first, 2.0), pair.second};
        CHECK(bilinear_functional(doubled, kind, 1.0, es).raw_value ==
              2.0 * base);
    }
}

TEST_CASE("alignment violations are rejected") {
    Hurst H(0.5);
    auto grid = test_grid();
    auto p = build_path(H, grid, 1, GenMethod::CirculantEmbedding);
    // T not a mesh multiple
    CHECK_THROWS_AS(hermite_variation(p, 2, 0.7501234, EpsSpec{4}),
                    std::invalid_argument);
    // grid does not cover T + eps
    CHECK_THROWS_AS(hermite_variation(p, 2, 1.0, EpsSpec{128}),
                    std::invalid_argument);
}

TEST_CASE("hat decomposition identity holds pathwise to 1e-12") {
    auto grid = test_grid();
    for (double h : {0.3, 0.6, 0.75}) {
        Hurst H(h);
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            auto beta = build_path(H, grid, derive_stream(seed, 11),
                                   GenMethod::CirculantEmbedding);
            auto beta_t = build_path(H, grid, derive_stream(seed, 12),
                                     GenMethod::CirculantEmbedding);
            double res = hat_decomposition_residual(beta, beta_t, 1.0,
                                                    EpsSpec{16});
            CHECK(res < 1e-12);
        }
    }
    // identical seeds: B2 vanishes, both sides zero
    Hurst H(0.6);
    auto b = build_path(H, grid, 5, GenMethod::CirculantEmbedding);
    CHECK(hat_decomposition_residual(b, b, 1.0, EpsSpec{16}) == 0.0);
    // zero paths
    auto z = zero_path(H, grid);
    CHECK(hat_decomposition_residual(z, z, 1.0, EpsSpec{16}) == 0.0);
}

TEST_CASE("Riemann refinement: halving the mesh moves values by O(delta)") {
    // Matched driving noise: the fine path is generated once and the coarse
    // path reads every second value, so both discretizations see the same
    // underlying trajectory.  The c in |G(delta) - G(delta/2)| <= c delta is
    // empirical for these fixed seeds (3x margin over the observed values);
    // the raw-value scale differs strongly across kinds and H.
    struct Row {
        double h;
        double hermite_c, tilde_c, breve_c, hat_c;
    };
    const std::vector<Row> table{
        {0.35, 2700.0, 23.0, 36.0, 220.0},
        {0.50, 200.0, 4.0, 15.0, 140.0},
        {0.70, 6.0, 0.24, 4.0, 13.0},
    };
    for (const Row& row : table) {
        Hurst H(row.h);
        GridSpec fine{1088.0 / 1024.0, 2176};    // delta/2
        GridSpec coarse{1088.0 / 1024.0, 1088};  // delta = 2^-10
        auto pf1 = build_path(H, fine, derive_stream(999, 1),
                              GenMethod::CirculantEmbedding);
        auto pf2 = build_path(H, fine, derive_stream(999, 2),
                              GenMethod::CirculantEmbedding);
        auto restrict_path = [&](const FbmPath& p) {
            FbmPath q{H, coarse, {}, p.seed, p.method};
            q.values.resize(coarse.n + 1);
            for (std::size_t i = 0; i <= coarse.n; ++i)
                q.values[i] = p.values[2 * i];
            return q;
        };
        auto pc1 = restrict_path(pf1);
        auto pc2 = restrict_path(pf2);

        const double delta = coarse.mesh();
        // eps = 2^-6 at both resolutions
        double gc = hermite_variation(pc1, 2, 1.0, EpsSpec{16}).raw_value;
        double gf = hermite_variation(pf1, 2, 1.0, EpsSpec{32}).raw_value;
        CHECK(std::abs(gf - gc) <= row.hermite_c * delta);

        PathPair coarse_pair{pc1, pc2}, fine_pair{pf1, pf2};
        auto diff_of = [&](FunctionalKind kind) {
            double vc =
                bilinear_functional(coarse_pair, kind, 1.0, EpsSpec{16})
                    .raw_value;
            double vf = bilinear_functional(fine_pair, kind, 1.0, EpsSpec{32})
                            .raw_value;
            return std::abs(vf - vc);
        };
        CHECK(diff_of(FunctionalKind::tilde()) <= row.tilde_c * delta);
        CHECK(diff_of(FunctionalKind::breve()) <= row.breve_c * delta);
        CHECK(diff_of(FunctionalKind::hat()) <= row.hat_c * delta);
    }
}

TEST_CASE("MC second moment matches the quadrature oracle (spot check)") {
    Hurst H(0.5);
    auto grid = test_grid();
    EpsSpec es{16};  // eps = 2^-6
    const double eps = es.eps(grid);
    const std::size_t reps = 800;

    std::vector<double> hat_vals(reps), breve_vals(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        auto pair = build_path_pair(H, grid, replica_seed(31, 0, i),
                                    GenMethod::CirculantEmbedding);
        hat_vals[i] =
            bilinear_functional(pair, FunctionalKind::hat(), 1.0, es)
                .raw_value;
        breve_vals[i] =
            bilinear_functional(pair, FunctionalKind::breve(), 1.0, es)
                .raw_value;
    }
    QuadratureSpec qs;
    auto mh = summarize_moments(hat_vals);
    double eh = second_moment_exact(FunctionalKind::hat(), H, 1.0, eps, eps, qs);
    CHECK(std::abs(mh.second_moment - eh) <= 3.0 * mh.se_second_moment);

    auto mb = summarize_moments(breve_vals);
    double eb =
        second_moment_exact(FunctionalKind::breve(), H, 1.0, eps, eps, qs);
    CHECK(std::abs(mb.second_moment - eb) <= 3.0 * mb.se_second_moment);
    // Ito isometry anchor: the Brownian breve second moment sits near 1/2
    CHECK(mb.second_moment == doctest::Approx(0.5).epsilon(0.1));
}

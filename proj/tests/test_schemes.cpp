#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "poem/schemes.hpp"

using namespace poem;
using namespace poem::schemes;

namespace {

ProblemSpec advection(double a = 0.5, double t_end = 2.0) {
    ProblemSpec p;
    p.kind = ProblemKind::Advect1d;
    p.a = a;
    p.t_end = t_end;
    return p;
}

grid::GridLadder ladder_1d(long long segments, const Fraction& dt, int levels,
                           grid::RefinementPath path, const Fraction& t_end = Fraction(2)) {
    return grid::build_ladder(1, segments, Fraction(1, 2), levels, path, {dt, t_end});
}

double field_mean(const FieldLevel& f) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < f.values.size(); ++i) s += f.values[i];
    return s / static_cast<double>(f.values.size());
}

double l2_error_vs_exact(const FieldLevel& f, const ProblemSpec& p) {
    double s = 0.0;
    const long long n = f.segments;
    for (long long iy = 0; iy < (f.dims == 2 ? n : 1); ++iy)
        for (long long ix = 0; ix < n; ++ix) {
            const double d = f.at(ix, iy) - exact_solution(p, ix * f.dx, iy * f.dx, p.t_end);
            s += d * d;
        }
    return std::sqrt(s / static_cast<double>(f.values.size()));
}

}  // namespace

TEST_CASE("constant data is transported unchanged") {
    SolverOptions opts;
    opts.ic_override = [](double, double) { return 7.25; };
    auto lad = ladder_1d(20, Fraction(1, 20), 3, grid::RefinementPath::ConstantCfl);
    for (auto scheme : {Scheme::BeamWarming, Scheme::Rk2Upwind2}) {
        auto f = solve(scheme, advection(), lad, 2, opts);
        for (Eigen::Index i = 0; i < f.values.size(); ++i) CHECK(f.values[i] == 7.25);
    }

    ProblemSpec p2;
    p2.kind = ProblemKind::Advect2d;
    p2.a = p2.a_y = 0.25;
    p2.t_end = 2.0;
    auto lad2 = grid::build_ladder(2, 8, Fraction(1, 2), 3, grid::RefinementPath::ConstantCfl,
                                   {Fraction(1, 8), Fraction(2)});
    auto f2 = solve(Scheme::Rk2Upwind2, p2, lad2, 1, opts);
    for (Eigen::Index i = 0; i < f2.values.size(); ++i) CHECK(f2.values[i] == 7.25);
}

TEST_CASE("one Beam-Warming step matches the stencil evaluated by hand") {
    // c = a dt / dx = 0.5 * (1/2) / (1/4) = 1.
    auto lad = grid::build_ladder(1, 4, Fraction(1, 2), 3, grid::RefinementPath::TimeOnly,
                                  {Fraction(1, 2), Fraction(1, 2)});
    const double data[4] = {1.0, 2.0, 4.0, 3.0};
    SolverOptions opts;
    opts.ic_override = [&](double x, double) { return data[static_cast<int>(x * 4.0 + 0.5)]; };
    auto f = solve(Scheme::BeamWarming, advection(0.5, 0.5), lad, 1, opts);
    REQUIRE(f.steps == 1);

    const double c = 1.0;
    for (int i = 0; i < 4; ++i) {
        const double pm1 = data[(i + 3) % 4];
        const double pm2 = data[(i + 2) % 4];
        const double expected = data[i] - 0.5 * c * (3.0 * data[i] - 4.0 * pm1 + pm2) +
                                0.5 * c * c * (data[i] - 2.0 * pm1 + pm2);
        CHECK(f.values[i] == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("periodic advection preserves the discrete mean to round-off") {
    auto lad = ladder_1d(50, Fraction(1, 50), 3, grid::RefinementPath::ConstantCfl);
    const ProblemSpec p = advection();
    const double mean0 = 2.0;  // mean of 2 + cos over a full period of samples
    for (auto scheme : {Scheme::BeamWarming, Scheme::Rk2Upwind2}) {
        auto f = solve(scheme, p, lad, 3, {});
        CHECK(field_mean(f) == doctest::Approx(mean0).epsilon(1e-13));
    }
}

TEST_CASE("solves are bitwise deterministic") {
    auto lad = ladder_1d(50, Fraction(1, 50), 3, grid::RefinementPath::ConstantCfl);
    auto f1 = solve(Scheme::Rk2Upwind2, advection(), lad, 3, {});
    auto f2 = solve(Scheme::Rk2Upwind2, advection(), lad, 3, {});
    REQUIRE(f1.values.size() == f2.values.size());
    for (Eigen::Index i = 0; i < f1.values.size(); ++i) CHECK(f1.values[i] == f2.values[i]);
}

TEST_CASE("analytic solutions and their symmetries") {
    ProblemSpec ad;
    ad.kind = ProblemKind::AdvDiff1d;
    ad.a = 0.4;
    ad.nu = 0.01;
    CHECK(exact_solution(ad, 0.0, 0.0, 0.0) == doctest::Approx(3.0));

    const ProblemSpec p = advection(0.5, 2.0);  // a*t = 1: one full period
    for (double x : {0.0, 0.13, 0.77})
        CHECK(exact_solution(p, x, 0.0, 2.0) == doctest::Approx(exact_solution(p, x, 0.0, 0.0)));

    ProblemSpec p2;
    p2.kind = ProblemKind::Advect2d;
    p2.a = p2.a_y = 0.25;  // (a_x + a_y) t = 1 at t = 2
    CHECK(exact_solution(p2, 0.3, 0.4, 2.0) == doctest::Approx(exact_solution(p2, 0.3, 0.4, 0.0)));
}

TEST_CASE("the manufactured source closes the advection-diffusion residual") {
    ProblemSpec p;
    p.kind = ProblemKind::AdvDiff1d;
    p.a = 0.4;
    p.nu = 0.01;
    // Oracle: central finite differences of the analytic solution.
    auto phi = [&](double x, double t) { return exact_solution(p, x, 0.0, t); };
    const double d = 1e-5;
    for (double x : {0.1, 0.37, 0.9})
        for (double t : {0.0, 0.7, 2.2}) {
            const double phi_t = (phi(x, t + d) - phi(x, t - d)) / (2 * d);
            const double phi_x = (phi(x + d, t) - phi(x - d, t)) / (2 * d);
            const double phi_xx = (phi(x + d, t) - 2 * phi(x, t) + phi(x - d, t)) / (d * d);
            const double residual = phi_t + p.a * phi_x - p.nu * phi_xx;
            CHECK(residual == doctest::Approx(source_term(p, x, t)).epsilon(1e-4));
        }

    ProblemSpec inviscid = p;
    inviscid.nu = 0.0;
    CHECK(source_term(inviscid, 0.3, 1.0) == 0.0);
    // Cosine zero: x - a t = 1/4.
    CHECK(source_term(p, 0.25 + p.a * 1.5, 1.5) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("advection-diffusion stays close to the manufactured solution") {
    ProblemSpec p;
    p.kind = ProblemKind::AdvDiff1d;
    p.a = 0.4;
    p.nu = 0.01;
    p.t_end = 2.5;
    auto lad = grid::build_ladder(1, 100, Fraction(1, 2), 3, grid::RefinementPath::ConstantDiffusion,
                                  {Fraction(1, 400), Fraction(5, 2)});
    auto f = solve(Scheme::Rk2Upwind2, p, lad, 1, {});
    CHECK(l2_error_vs_exact(f, p) < 5e-3);
}

TEST_CASE("convergence orders of the reference schemes") {
    SUBCASE("Rk2Upwind2 at constant CFL converges at order 2") {
        const ProblemSpec p = advection();
        auto lad = grid::build_ladder(1, 50, Fraction(1, 2), 4, grid::RefinementPath::ConstantCfl,
                                      {Fraction(1, 50), Fraction(2)});
        std::vector<double> errs;
        for (int l = 1; l <= 4; ++l) errs.push_back(l2_error_vs_exact(solve(Scheme::Rk2Upwind2, p, lad, l, {}), p));
        for (int l = 1; l < 4; ++l) {
            const double slope = std::log2(errs[l - 1] / errs[l]);
            if (l >= 2) CHECK(slope == doctest::Approx(2.0).epsilon(0.025));
        }
    }
    SUBCASE("Beam-Warming at constant CFL converges at order 2") {
        const ProblemSpec p = advection();
        auto lad = grid::build_ladder(1, 50, Fraction(1, 2), 4, grid::RefinementPath::ConstantCfl,
                                      {Fraction(1, 50), Fraction(2)});
        std::vector<double> errs;
        for (int l = 1; l <= 4; ++l) errs.push_back(l2_error_vs_exact(solve(Scheme::BeamWarming, p, lad, l, {}), p));
        const double slope = std::log2(errs[2] / errs[3]);
        CHECK(slope == doctest::Approx(2.0).epsilon(0.025));
    }
    SUBCASE("time-only Beam-Warming converges at order 1 toward the small-dt limit") {
        const ProblemSpec p = advection();
        auto lad = grid::build_ladder(1, 50, Fraction(1, 2), 8, grid::RefinementPath::TimeOnly,
                                      {Fraction(1, 50), Fraction(2)});
        auto reference = solve(Scheme::BeamWarming, p, lad, 8, {});
        std::vector<double> errs;
        for (int l = 1; l <= 3; ++l) {
            auto f = solve(Scheme::BeamWarming, p, lad, l, {});
            double s = 0.0;
            for (Eigen::Index i = 0; i < f.values.size(); ++i) {
                const double d = f.values[i] - reference.values[i];
                s += d * d;
            }
            errs.push_back(std::sqrt(s / static_cast<double>(f.values.size())));
        }
        CHECK(std::log2(errs[1] / errs[2]) == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("stability gates") {
    // Rk2Upwind2 CFL of 1 exceeds the default limit of 0.5.
    auto lad = grid::build_ladder(1, 10, Fraction(1, 2), 3, grid::RefinementPath::ConstantCfl,
                                  {Fraction(1, 5), Fraction(2)});
    CHECK_THROWS_AS(solve(Scheme::Rk2Upwind2, advection(0.5), lad, 1, {}), UnstableParameters);
    SolverOptions relaxed;
    relaxed.cfl_limit = 1.5;
    CHECK_NOTHROW(solve(Scheme::Rk2Upwind2, advection(0.5), lad, 1, relaxed));

    // Beam-Warming tolerates c up to 2.
    CHECK_NOTHROW(solve(Scheme::BeamWarming, advection(0.5), lad, 1, {}));
    auto too_big = grid::build_ladder(1, 10, Fraction(1, 2), 3, grid::RefinementPath::ConstantCfl,
                                      {Fraction(1), Fraction(2)});
    CHECK_THROWS_AS(solve(Scheme::BeamWarming, advection(0.5), too_big, 1, {}), UnstableParameters);
}

TEST_CASE("scheme and problem pairing is validated") {
    auto lad = ladder_1d(20, Fraction(1, 20), 3, grid::RefinementPath::ConstantCfl);
    ProblemSpec ad;
    ad.kind = ProblemKind::AdvDiff1d;
    ad.a = 0.4;
    ad.nu = 0.01;
    ad.t_end = 2.0;
    CHECK_THROWS_AS(solve(Scheme::BeamWarming, ad, lad, 1, {}), ConfigError);

    ProblemSpec neg = advection(-1.0);
    CHECK_THROWS_AS(solve(Scheme::Rk2Upwind2, neg, lad, 1, {}), ConfigError);
}

#include <cmath>

#include "blowup/decomposition.hpp"
#include "blowup/error.hpp"
#include "blowup/parameter_dynamics.hpp"
#include "doctest.h"

using namespace blowup;

namespace {
const Grid grid(60.0, 3001);
}

TEST_CASE("profile splits with zero residual") {
    const ProfileParams pp = ProfileParams::from_a(0.45, 0.05);
    const Field V = profile(ProfileKind::V_ab, pp, 3.0, grid);
    const Vec2 r = split_residual(V, 3.0, pp.a, pp.b);
    CHECK(std::abs(r[0]) < 1e-14);
    CHECK(std::abs(r[1]) < 1e-14);
    const SplitResult s = solve_g(V, 3.0, 0.5, 0.08);
    CHECK(s.params.a == doctest::Approx(pp.a).epsilon(1e-12));
    CHECK(s.params.b == doctest::Approx(pp.b).epsilon(1e-12));
    CHECK(s.deviation.sup_norm() < 1e-12);
    CHECK(s.in_window);
}

TEST_CASE("analytic Jacobian matches finite differences") {
    const ProfileParams pp = ProfileParams::from_a(0.45, 0.05);
    const Field v = profile(ProfileKind::V_ab, pp, 3.0, grid) +
                    Field::sample(grid, [](double y) { return 0.003 * std::cos(y) * std::exp(-y * y / 8); });
    const double a = 0.46, b = 0.045, h = 1e-6;
    const Mat2 J = split_jacobian(v, 3.0, a, b);
    const Vec2 ap = split_residual(v, 3.0, a + h, b), am = split_residual(v, 3.0, a - h, b);
    const Vec2 bp = split_residual(v, 3.0, a, b + h), bm = split_residual(v, 3.0, a, b - h);
    for (int i = 0; i < 2; ++i) {
        CHECK(J[i][0] == doctest::Approx((ap[i] - am[i]) / (2 * h)).epsilon(1e-6));
        CHECK(J[i][1] == doctest::Approx((bp[i] - bm[i]) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("fluctuation is orthogonal to the two modes") {
    const ProfileParams pp = ProfileParams::from_a(0.45, 0.05);
    const Field v = profile(ProfileKind::V_ab, pp, 3.0, grid) +
                    Field::sample(grid, [](double y) { return 0.0025 * (1 + y * y) * std::exp(-y * y / 6); });
    const SplitResult s = solve_g(v, 3.0, pp.a, pp.b);
    const double a = s.params.a;
    CHECK(std::abs(l2_inner(s.xi, hermite_phi(0, a, grid))) < 1e-12);
    CHECK(std::abs(l2_inner(s.xi, hermite_phi(2, a, grid))) < 1e-12);
    // xi is the gauged deviation.
    const std::size_t i = grid.center() + 200;
    const double y = grid.node(i);
    CHECK(s.xi[i] == doctest::Approx(std::exp(-a * y * y / 4) * s.deviation[i]));
}

TEST_CASE("splitting rejects data far from the profile family") {
    const Field neg = Field::sample(grid, [](double y) { return -std::exp(-y * y); });
    CHECK_THROWS_AS(solve_g(neg, 3.0, 0.5, 0.05), Error);
}

TEST_CASE("beta law and kappa") {
    CHECK(beta_of_tau(0.0, 0.05, 3.0) == doctest::Approx(0.05));
    CHECK(1.0 / beta_of_tau(10.0, 0.05, 3.0) == doctest::Approx(20.0 + 30.0));
    CHECK(kappa_of_p(3.0) == doctest::Approx(0.5));
    CHECK(kappa_of_p(1.5) == doctest::Approx(0.25));
}

TEST_CASE("remainders vanish along the truncated system") {
    // Only the sampled derivative contributes, so the remainder shrinks like dtau^2.
    auto worst_remainder = [](double dtau) {
        TruncatedOptions opt;
        opt.tol = 1e-13;
        for (int k = 0; k * dtau <= 20.0 + 1e-12; ++k) opt.sample_times.push_back(dtau * k);
        const auto tr = integrate_truncated({0.0, 0.05, 0.475}, 20.0, opt);
        std::vector<double> tau, a, b, c;
        for (const auto& s : tr.states) {
            tau.push_back(s.tau);
            b.push_back(s.b);
            c.push_back(s.c);
            a.push_back(2.0 * s.c - 0.5);
        }
        const EffectiveRHS r = compute_gammas(tau, a, b, c, 3.0);
        double worst = 0.0;
        for (std::size_t i = 2; i + 2 < tau.size(); ++i) {
            worst = std::max(worst, std::abs(r.R_b[i]) / (b[i] * b[i]));
            worst = std::max(worst, std::abs(r.R_c[i]) / b[i]);
        }
        return worst;
    };
    const double coarse = worst_remainder(0.05), fine = worst_remainder(0.025);
    CHECK(coarse < 2e-3);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("nonlinear remainder is quadratic in the fluctuation") {
    const ProfileParams pp = ProfileParams::from_a(0.45, 0.05);
    const Grid g(20.0, 801);
    const Field zero(g);
    CHECK(evaluate_N(zero, pp, 3.0).sup_norm() == 0.0);
    auto bump = [&](double eps) {
        return Field::sample(g, [&](double y) { return eps * std::exp(-y * y / 2); });
    };
    const double n1 = evaluate_N(bump(1e-3), pp, 3.0).sup_norm();
    const double n2 = evaluate_N(bump(2e-3), pp, 3.0).sup_norm();
    CHECK(n2 / n1 == doctest::Approx(4.0).epsilon(0.01));
    const double C = nonlinearity_constant(bump(1e-2), pp, 3.0);
    CHECK(std::isfinite(C));
    CHECK(C > 0.0);
}

TEST_CASE("majorant series are running maxima") {
    const ProfileParams pp = ProfileParams::from_a(0.45, 0.05);
    const Field V = profile(ProfileKind::V_ab, pp, 3.0, grid);
    std::vector<SplitSample> hist;
    const std::vector<double> cut{5.0};
    for (int k = 0; k < 5; ++k) {
        const Field v = V + Field::sample(grid, [&](double y) { return 1e-4 * (k % 3) * std::exp(-y * y / 8); });
        hist.push_back(summarize_split(solve_g(v, 3.0, pp.a, pp.b), 0.1 * k, 3.0, 0.05, cut));
    }
    const MajorantSeries m = compute_majorants(hist, 3.0, 0.05, 0, 5.0);
    for (std::size_t i = 1; i < m.tau.size(); ++i) {
        CHECK(m.M1[i] >= m.M1[i - 1]);
        CHECK(m.M1[i] >= m.M1_inst[i]);
        CHECK(m.B[i] >= m.B_inst[i]);
    }
    CHECK(m.cutoff_coverage == doctest::Approx(1.0));
}

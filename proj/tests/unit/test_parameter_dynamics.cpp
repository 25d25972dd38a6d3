#include <cmath>

#include "blowup/error.hpp"
#include "blowup/parameter_dynamics.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("beta law") {
    const BetaLaw law{0.05, 3.0};
    CHECK(law(0.0) == doctest::Approx(0.05));
    CHECK(law.inverse_slope() == doctest::Approx(3.0));
    CHECK(1.0 / law(4.0) == doctest::Approx(32.0));
    CHECK_THROWS_AS(law(-1.0), DomainError);
}

TEST_CASE("equilibrium Jacobian against finite differences") {
    for (double l : {1.5, 2.0, 3.0}) {
        TruncatedOptions opt;
        opt.l = l;
        const auto J = jacobian_at_equilibrium(l, 3.0);
        const double h = 1e-7;
        const auto bp = truncated_rhs(0, h, 0.5, opt), bm = truncated_rhs(0, -h, 0.5, opt);
        const auto cp = truncated_rhs(0, 0, 0.5 + h, opt), cm = truncated_rhs(0, 0, 0.5 - h, opt);
        for (int i = 0; i < 2; ++i) {
            CHECK(J.J[i][0] == doctest::Approx((bp[i] - bm[i]) / (2 * h)).epsilon(1e-7));
            CHECK(J.J[i][1] == doctest::Approx((cp[i] - cm[i]) / (2 * h)).epsilon(1e-7));
        }
        CHECK(J.eigenvalues[0] == doctest::Approx(1.0 - l));
        CHECK(std::abs(J.eigenvalues[1]) < 1e-12);
    }
}

TEST_CASE("truncated system: 1/b grows with slope 4p/(p-1)^2") {
    const auto tr = integrate_truncated({0.0, 0.05, 0.475}, 100.0);
    CHECK_FALSE(tr.left_region);
    const LawFit f = fit_inverse_b_slope(tr.states, 3.0, 10.0, 100.0);
    CHECK(f.target == doctest::Approx(3.0));
    CHECK(f.rel_error < 0.01);
    TruncatedOptions opt;
    CHECK(truncated_gauge_ratio(tr.states, opt) < 10.0);
}

TEST_CASE("remainder terms steer the system") {
    TruncatedOptions opt;
    opt.R_b = [](double, double, double) { return -1.0; };
    const auto tr = integrate_truncated({0.0, 0.01, 0.5}, 5.0, opt);
    CHECK(tr.left_region);
    CHECK(tr.states.back().tau < 5.0);
}

TEST_CASE("sample times are hit exactly") {
    TruncatedOptions opt;
    opt.sample_times = {0.5, 1.0, 2.5};
    const auto tr = integrate_truncated({0.0, 0.05, 0.475}, 3.0, opt);
    REQUIRE(tr.states.size() >= 3);
    int hits = 0;
    for (const auto& s : tr.states)
        for (double t : opt.sample_times)
            if (s.tau == t) ++hits;
    CHECK(hits == 3);
}

TEST_CASE("leading-order laws") {
    const double theta = std::exp(-10.0);
    const auto pr = asymptotic_laws(1.0 - theta, 1.0, 3.0);
    CHECK(pr.lambda == doctest::Approx(std::exp(5.0)));
    CHECK(pr.b == doctest::Approx(4.0 / (12.0 * 10.0)));
    CHECK(pr.c == doctest::Approx(0.5 - 2.0 / (12.0 * 10.0)));
    CHECK_THROWS_AS(asymptotic_laws(0.0, 2.0, 3.0), DomainError);
}

TEST_CASE("law fits recover synthetic data") {
    LawFitInput in;
    in.p = 3.0;
    for (int k = 0; k <= 100; ++k) {
        const double tau = 0.5 * k;
        const double theta = std::exp(-2.0 * tau) * 0.3;
        in.tau.push_back(tau);
        in.theta.push_back(theta);
        in.lambda.push_back(2.0 / std::sqrt(theta));
        in.b.push_back(1.0 / (1.0 / 0.05 + 3.0 * tau));
    }
    const LawFitReport r = fit_blowup_laws(in);
    CHECK(r.inv_b_slope.fitted == doctest::Approx(3.0));
    CHECK(r.lambda_exponent.fitted == doctest::Approx(-0.5));
    LawFitInput small;
    small.tau = {1.0};
    small.b = {0.1};
    small.lambda = {1.0};
    small.theta = {0.1};
    CHECK_THROWS_AS(fit_blowup_laws(small), DomainError);
}

TEST_CASE("limit profile") {
    CHECK(limit_profile(0.0, 3.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(limit_profile(std::sqrt(6.0), 3.0) == doctest::Approx(0.5));
}

#include <cmath>

#include "blowup/frames.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("monotone spline reproduces linear data and inverts") {
    const MonotoneSpline s({0.0, 1.0, 2.0, 4.0}, {1.0, 3.0, 5.0, 9.0});
    CHECK(s(1.5) == doctest::Approx(4.0));
    CHECK(s.derivative(3.0) == doctest::Approx(2.0));
    CHECK(s.inverse(6.0) == doctest::Approx(2.5));
}

TEST_CASE("frame with constant a = 1/2") {
    // lambda = (1 - t)^{-1/2}, tau = -ln(1 - t).
    const BlowupFrame f = BlowupFrame::from_a_of_t([](double) { return 0.5; }, 0.9, 4000);
    for (double t : {0.1, 0.5, 0.85}) {
        CHECK(f.lambda_at(t) == doctest::Approx(1.0 / std::sqrt(1.0 - t)).epsilon(1e-8));
        CHECK(f.tau_of_t(t) == doctest::Approx(-std::log(1.0 - t)).epsilon(1e-8));
    }
    CHECK(f.t_of_tau(std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(f.a_consistency_error() < 1e-5);
    CHECK(f.lambda_reconstruction_error() < 1e-8);

    std::vector<double> tau, a;
    for (int k = 0; k <= 200; ++k) {
        tau.push_back(0.01 * k);
        a.push_back(0.5);
    }
    const BlowupFrame g = BlowupFrame::from_a_history(tau, a);
    // t(tau) = 1 - e^{-tau}.
    CHECK(g.t().back() == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("similarity transform round trip") {
    const double p = 3.0, lambda = 1.7;
    const Grid gx(10.0, 2001), gy(10.0, 2001);
    const Field u = Field::sample(gx, [](double x) { return std::exp(-x * x); }, Parity::even);
    const Resampled v = to_similarity(u, lambda, p, gy);
    CHECK(v.field[gy.center()] == doctest::Approx(1.0 / lambda));
    const Resampled back = from_similarity(v.field, lambda, p, gx);
    CHECK((back.field - u).sup_norm() < 1e-8);
}

TEST_CASE("gauge and ungauge invert each other") {
    const Grid g(8.0, 161);
    const Field v = Field::sample(g, [](double y) { return 1.0 + y * y; });
    const Field back = ungauge(gauge(v, 0.5), 0.5);
    CHECK((back - v).sup_norm() < 1e-12 * v.sup_norm());
    std::vector<std::size_t> overflow;
    const Field w = Field::sample(Grid(100.0, 11), [](double) { return 1.0; });
    ungauge(w, 1.0, &overflow);
    CHECK(!overflow.empty());
}

TEST_CASE("closed-form sigma matches quadrature") {
    RescaledFrame r;
    r.alpha = 0.45;
    r.T = 3.0;
    r.t_T = 0.2;
    r.lambda_T = 2.0;
    const double t = 0.45;  // lambda_1 is singular at t = 0.2 + 0.25/0.9
    const int n = 20000;
    double integral = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = t * (i + 0.5) / n;
        integral += r.lambda1(s) * r.lambda1(s) * t / n;
    }
    CHECK(r.sigma(t) == doctest::Approx(integral).epsilon(1e-7));
    CHECK(r.lambda1(r.t_T) == doctest::Approx(2.0));
    const double h = 1e-6;
    CHECK(r.dlambda1_dt(0.3) == doctest::Approx((r.lambda1(0.3 + h) - r.lambda1(0.3 - h)) / (2 * h)).epsilon(1e-6));
}

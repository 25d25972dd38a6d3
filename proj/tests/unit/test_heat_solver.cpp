#include <cmath>

#include "blowup/error.hpp"
#include "blowup/heat_solver.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("homogeneous solution and reaction flow") {
    CHECK(homogeneous_solution(1.0, 0.25, 3.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(reaction_flow(1.0, 0.25, 3.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(reaction_flow(-1.0, 0.25, 3.0) == doctest::Approx(-std::sqrt(2.0)));
    CHECK(std::isinf(reaction_flow(1.0, 0.6, 3.0)));
    // p = 2: u' = u^2 from 0.5 reaches 1 at t = 1.
    CHECK(reaction_flow(0.5, 1.0, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("local existence constants") {
    CHECK(local_existence_time(3.0, 1.0) == doctest::Approx(1.0 / 432.0).epsilon(1e-15));
    CHECK(local_apriori_bound(3.0, 1.0) == doctest::Approx(3.0 * std::cbrt(2.0)).epsilon(1e-15));
    CHECK(local_existence_time(3.0, 1e-3) == doctest::Approx(0.5));
}

TEST_CASE("heat semigroup maps Gaussians to Gaussians") {
    const Grid g(15.0, 1501);
    auto gauss = [](double s) {
        return [s](double x) { return std::exp(-x * x / (4 * s)) / std::sqrt(4 * M_PI * s); };
    };
    const Field f = Field::sample(g, gauss(0.5));
    const Field out = heat_semigroup_apply(f, 0.75);
    const Field exact = Field::sample(g, gauss(1.25));
    CHECK((out - exact).sup_norm() < 1e-6);
}

TEST_CASE("IMEX step is second order diffusion for small data") {
    const Grid g(15.0, 1501);
    auto gauss = [](double s) {
        return [s](double x) { return 1e-8 * std::exp(-x * x / (4 * s)) / std::sqrt(4 * M_PI * s); };
    };
    Field u = Field::sample(g, gauss(0.5), Parity::even);
    for (int k = 0; k < 100; ++k) u = step_imex(u, 0.005, 3.0);
    const Field exact = Field::sample(g, gauss(1.0));
    CHECK((u - exact).sup_norm() / exact.sup_norm() < 1e-4);
}

TEST_CASE("energy of a Gaussian") {
    const Grid g(10.0, 4001);
    const double A = 1.3;
    const Field u = Field::sample(g, [&](double x) { return A * std::exp(-x * x); });
    const double exact = 0.5 * A * A * std::sqrt(M_PI / 2) - A * A * A * A * std::sqrt(M_PI) / 8;
    CHECK(energy_E(u, 3.0) == doctest::Approx(exact).epsilon(1e-5));
}

TEST_CASE("Lyapunov functional at the constant equilibrium") {
    const Grid g(30.0, 3001);
    const Field w = Field::sample(g, [](double) { return 1.0 / std::sqrt(2.0); });
    CHECK(lyapunov_S(w, 3.0) == doctest::Approx(std::sqrt(M_PI) / 8).epsilon(1e-8));
    CHECK(weighted_I(w) == doctest::Approx(0.5 * 0.5 * 2 * std::sqrt(M_PI)).epsilon(1e-8));
}

TEST_CASE("scaled energy equals S of the rescaled datum") {
    const double p = 3.0, T = 0.4;
    auto u0 = [](double x) { return 2.0 * std::exp(-x * x / 3.0); };
    const Field u = Field::sample(Grid(20.0, 4001), u0);
    const Field w = Field::sample(Grid(40.0, 4001), [&](double y) { return std::sqrt(T) * u0(std::sqrt(T) * y); });
    CHECK(scaled_energy_S_T(u, p, T) == doctest::Approx(lyapunov_S(w, p)).epsilon(1e-6));
}

TEST_CASE("w-flow decreases S") {
    const Grid g(20.0, 801);
    Field w = Field::sample(g, [](double y) { return 0.5 * std::exp(-y * y / 8); }, Parity::even);
    double S = lyapunov_S(w, 3.0);
    for (int k = 0; k < 50; ++k) {
        w = step_w_flow(w, 0.05, 3.0);
        const double next = lyapunov_S(w, 3.0);
        CHECK(next <= S + 1e-12);
        S = next;
    }
}

TEST_CASE("constant data blow up at the ODE time") {
    const Grid g(20.0, 1001);
    HeatProblem hp{3.0, Field::sample(g, [](double) { return 2.0; }, Parity::even)};
    auto [trace, est] = solve_to_blowup(hp);
    CHECK(trace.reason == Termination::blowup_detected);
    CHECK(est.t_star == doctest::Approx(0.125).epsilon(1e-3));
}

TEST_CASE("small data reach the horizon") {
    const Grid g(20.0, 801);
    HeatProblem hp{3.0, Field::sample(g, [](double x) { return 0.3 * std::exp(-x * x); }, Parity::even), 1.0};
    auto [trace, est] = solve_to_blowup(hp);
    CHECK(trace.reason == Termination::horizon_reached);
    CHECK(trace.records.back().t == doctest::Approx(1.0));
    CHECK(std::isnan(est.t_star));
}

TEST_CASE("non-finite data are rejected") {
    Field f(Grid(1.0, 11));
    f[3] = NAN;
    CHECK_THROWS_AS(duhamel_local_solve(HeatProblem{3.0, f}), DomainError);
}

#include <cmath>

#include "blowup/error.hpp"
#include "blowup/grid.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("nodes are symmetric and the center is zero") {
    const Grid g(3.0, 61);
    CHECK(g.node(g.center()) == 0.0);
    for (std::size_t k = 0; k <= g.center(); ++k) CHECK(g.node(g.center() - k) == -g.node(g.center() + k));
    CHECK(g.node(0) == doctest::Approx(-3.0));
    CHECK(g.refined().spacing() == doctest::Approx(g.spacing() / 2));
}

TEST_CASE("trapezoid integral of a Gaussian") {
    const Grid g(10.0, 2001);
    const Field f = Field::sample(g, [](double y) { return std::exp(-y * y); });
    CHECK(integrate(f) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(l2_inner(f, f) == doctest::Approx(std::sqrt(M_PI / 2)).epsilon(1e-12));
}

TEST_CASE("weighted sup norm") {
    const Grid g(5.0, 101);
    const Field one = Field::sample(g, [](double) { return 1.0; });
    CHECK(weighted_sup_norm(one, {3, 0.0}) == doctest::Approx(1.0));
    // <y>^{-3} e^{y^2/4} is largest at the ends: 26^{-3/2} e^{25/4}.
    CHECK(weighted_sup_norm(one, {3, 1.0}) == doctest::Approx(std::pow(26.0, -1.5) * std::exp(6.25)));
    const Field big = Field::sample(Grid(100.0, 201), [](double) { return 1.0; });
    CHECK_THROWS_AS(weighted_sup_norm(big, {0, 4.0}), WeightOverflow);
}

TEST_CASE("parity projection") {
    const Grid g(2.0, 41);
    Field f = Field::sample(g, [](double y) { return y * y + 0.1 * y; }, Parity::even);
    f.enforce_parity();
    CHECK(f.parity_defect() < 1e-15);
    CHECK(f[g.center() + 3] == doctest::Approx(g.node(g.center() + 3) * g.node(g.center() + 3)));
    Field o = Field::sample(g, [](double y) { return y + 1.0; }, Parity::odd);
    o.enforce_parity();
    CHECK(o[g.center()] == 0.0);
    CHECK(o[g.center() + 5] == doctest::Approx(g.node(g.center() + 5)));
}

TEST_CASE("cubic interpolation is exact on cubics") {
    const Grid g(2.0, 41);
    auto c = [](double y) { return 1.0 - 2.0 * y + 0.5 * y * y * y; };
    const Field f = Field::sample(g, c);
    for (double x : {-1.73, -0.01, 0.333, 1.9}) CHECK(interpolate(f, x) == doctest::Approx(c(x)).epsilon(1e-12));
    CHECK(interpolate(f, 2.5) == 0.0);
}

TEST_CASE("cutoff indicator") {
    const Grid g(4.0, 81);
    const Field hi = cutoff_chi(g, 1.0, CutoffSide::geq);
    const Field lo = cutoff_chi(g, 1.0, CutoffSide::leq);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(hi[i] + lo[i] == 1.0);
        CHECK(hi[i] == (std::abs(g.node(i)) >= 1.0 ? 1.0 : 0.0));
    }
}

TEST_CASE("mismatched grids are rejected") {
    const Field a(Grid(1.0, 11)), b(Grid(1.0, 21));
    CHECK_THROWS_AS(a + b, GridMismatch);
}

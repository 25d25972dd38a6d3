#include <cmath>
#include <vector>

#include "blowup/numerics.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("tridiagonal solve reproduces the right-hand side") {
    const std::size_t n = 50;
    std::vector<double> sub(n, -1.0), diag(n), sup(n, -0.7), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = 3.0 + 0.01 * i;
        rhs[i] = std::sin(0.3 * i);
    }
    const auto x = solve_tridiagonal(sub, diag, sup, rhs);
    for (std::size_t i = 0; i < n; ++i) {
        double r = diag[i] * x[i];
        if (i > 0) r += sub[i] * x[i - 1];
        if (i + 1 < n) r += sup[i] * x[i + 1];
        CHECK(r == doctest::Approx(rhs[i]).epsilon(1e-12));
    }
}

TEST_CASE("line fit recovers an exact line") {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(i);
        y.push_back(2.5 * i - 1.0);
    }
    const LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.5));
    CHECK(f.intercept == doctest::Approx(-1.0));
    CHECK(f.rms_residual < 1e-12);
    CHECK(f.count == 10);
}

TEST_CASE("smoothed derivative is exact on quadratics") {
    const double dx = 0.1;
    std::vector<double> f;
    for (int i = 0; i < 20; ++i) f.push_back(1.0 + 2.0 * i * dx - 0.5 * (i * dx) * (i * dx));
    const auto d = smoothed_derivative(f, dx);
    for (int i = 0; i < 20; ++i) CHECK(d[i] == doctest::Approx(2.0 - i * dx).epsilon(1e-10));
}

TEST_CASE("lowest eigenvalues of the discrete Laplacian") {
    const std::size_t n = 200;
    std::vector<double> diag(n, 2.0), off(n - 1, -1.0);
    const auto e = sym_tridiag_lowest(diag, off, 5);
    for (std::size_t k = 0; k < 5; ++k) {
        const double exact = 2.0 - 2.0 * std::cos((k + 1) * M_PI / (n + 1));
        CHECK(e.values[k] == doctest::Approx(exact).epsilon(1e-12));
        CHECK(e.residuals[k] < 1e-10);
        // Compare with the sine eigenvector up to sign.
        double dot = 0.0, nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = std::sin((k + 1) * (i + 1) * M_PI / (n + 1));
            dot += s * e.vectors[k][i];
            nrm += s * s;
        }
        CHECK(std::abs(dot) / std::sqrt(nrm) == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(sturm_count(diag, off, e.values[2] + 1e-9) == 3);
}

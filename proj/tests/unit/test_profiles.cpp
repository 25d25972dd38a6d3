#include <cmath>

#include "blowup/profiles.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("gauge relation between a and c") {
    const ProfileParams pp = ProfileParams::from_c(0.45, 0.05, 2.0);
    CHECK(pp.a == doctest::Approx(0.4));
    CHECK(ProfileParams::from_a(pp.a, pp.b, 2.0).c == doctest::Approx(0.45));
    CHECK(pp.gauge_defect() == doctest::Approx(0.0));
}

TEST_CASE("profile values") {
    const ProfileParams pp{0.5, 0.1, 0.4, 2.0};
    const double p = 3.0;
    CHECK(profile_value(ProfileKind::v_a, pp, p, 7.0) == doctest::Approx(std::sqrt(0.5)));
    CHECK(profile_value(ProfileKind::v_ab, pp, p, 2.0) == doctest::Approx(std::sqrt(1.0 / 2.4)));
    CHECK(profile_value(ProfileKind::V_ab, pp, p, 2.0) == doctest::Approx(std::sqrt(0.8 / 2.4)));
    CHECK(profile_value(ProfileKind::v_abc, pp, p, 2.0) ==
          doctest::Approx(std::sqrt(0.8 / 2.4) * std::exp(-0.5)));
}

TEST_CASE("Hermite functions are orthonormal") {
    const Grid g(30.0, 3001);
    for (double a : {0.3, 0.5, 1.0}) {
        for (int m = 0; m < 5; ++m)
            for (int n = 0; n < 5; ++n) {
                const double ip = l2_inner(hermite_phi(m, a, g), hermite_phi(n, a, g));
                CHECK(ip == doctest::Approx(m == n ? 1.0 : 0.0).epsilon(1e-10));
            }
    }
    // Sign convention for n = 2: positive at the origin.
    CHECK(hermite_value(2, 0.5, 0.0) == doctest::Approx(std::pow(0.5 / (8 * M_PI), 0.25)));
}

TEST_CASE("harmonic oscillator spectrum") {
    OperatorParams op;
    op.prof = ProfileParams::from_a(0.5, 0.0);
    const OperatorMatrix m = assemble(OperatorKind::L0_a, op, Grid(20.0, 2001));
    const Spectrum s = eigen_spectrum(m, 4);
    for (std::size_t n = 0; n < 4; ++n) {
        CHECK(s.values[n] == doctest::Approx(0.5 * n).epsilon(1e-4));
        CHECK(s.residuals[n] < 1e-8);
        // Eigenvectors agree with the Hermite functions up to sign.
        const double ip = l2_inner(s.vectors[n], hermite_phi(static_cast<int>(n), 0.5, m.grid));
        CHECK(std::abs(ip) == doctest::Approx(1.0).epsilon(1e-5));
    }
    const auto ex = extrapolated_eigenvalues(m, 4);
    for (std::size_t n = 0; n < 4; ++n) CHECK(ex[n] == doctest::Approx(0.5 * n).epsilon(1e-8));
}

TEST_CASE("shifted operator and bounds bookkeeping") {
    OperatorParams op;
    op.alpha = 0.5;
    const auto ev = extrapolated_eigenvalues(assemble(OperatorKind::L0_shifted, op, Grid(20.0, 2001)), 3);
    for (std::size_t n = 0; n < 3; ++n) CHECK(ev[n] == doctest::Approx(0.5 * n - 1.0).epsilon(1e-8));

    const ProfileParams pp{0.5, 0.0, 0.5, 2.0};
    const std::vector<double> inside{0.0, 0.5}, outside{2.0, 0.5};
    CHECK(check_eigen_bounds(3.0, pp, inside).ok);
    const auto bad = check_eigen_bounds(3.0, pp, outside);
    CHECK_FALSE(bad.ok);
    CHECK(bad.violations.size() == 1);
    // n a + 2a/(p-1) and n a + 2(a - p c)/(p-1) at n = 1.
    CHECK(bad.rows[1].upper == doctest::Approx(1.0));
    CHECK(bad.rows[1].lower == doctest::Approx(0.5 + (0.5 - 1.5)));
}

TEST_CASE("low-mode projection") {
    const Grid g(25.0, 2501);
    const Field f = Field::sample(g, [](double y) { return (1.0 + y + y * y * y) * std::exp(-y * y / 8); });
    const Field low = project_P(0.5, f, ProjectionPart::low);
    const Field high = project_P(0.5, f, ProjectionPart::complement);
    CHECK((low + high - f).sup_norm() < 1e-14);
    for (int n = 0; n <= 2; ++n) CHECK(std::abs(l2_inner(high, hermite_phi(n, 0.5, g))) < 1e-12);
    CHECK((project_P(0.5, low, ProjectionPart::low) - low).sup_norm() < 1e-12);
}

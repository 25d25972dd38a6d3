#include <cmath>
#include <vector>

#include "blowup/feynman_kac.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("potential is nonnegative with the stated gradient bound") {
    const double p = 3.0, alpha = 0.5, beta = 0.05;
    CHECK(profile_potential(0.0, p, alpha, beta) == 0.0);
    double worst = 0.0;
    for (int i = -4000; i <= 4000; ++i) {
        const double y = 0.01 * i, h = 1e-5;
        CHECK(profile_potential(y, p, alpha, beta) >= 0.0);
        const double d = (profile_potential(y + h, p, alpha, beta) - profile_potential(y - h, p, alpha, beta)) / (2 * h);
        worst = std::max(worst, std::abs(d));
    }
    CHECK(profile_potential_gradient_bound(p, alpha, beta) == doctest::Approx(worst).epsilon(1e-4));
}

TEST_CASE("unnormalised and standard Mehler prefactors differ by 4 pi sqrt(2 pi)") {
    for (double r : {0.3, 1.0, 2.0})
        CHECK(mehler_unnormalised_prefactor(0.5, r) / mehler_standard_prefactor(0.5, r) ==
              doctest::Approx(4 * M_PI * std::sqrt(2 * M_PI)));
}

TEST_CASE("Mehler kernel matches the discretised oscillator") {
    std::vector<KernelPoint> pts{{0.0, 0.0}, {0.5, -1.0}, {1.0, 1.0}, {-1.5, 0.25}};
    const DirectKernel d = direct_propagator_kernel([](double) { return 0.0; }, 0.5, 1.0, pts, 10.0, 801);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(d.U0[i] == doctest::Approx(mehler_kernel_U0(0.5, 1.0, pts[i].x, pts[i].y)).epsilon(1e-5));
        CHECK(d.ratio[i] == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("classical path hits its endpoints") {
    CHECK(omega0(0.5, 0.0, 1.0, 2.0, -1.0, 0.0) == doctest::Approx(-1.0));
    CHECK(omega0(0.5, 0.0, 1.0, 2.0, -1.0, 1.0) == doctest::Approx(2.0));
    const auto path = omega0_path(0.5, 0.0, 1.0, 2.0, -1.0, 10);
    CHECK(path.size() == 11);
    CHECK(path.front() == doctest::Approx(-1.0));
    CHECK(path.back() == doctest::Approx(2.0));
}

TEST_CASE("bridge variance approaches 2 G(s, s) for -d^2 + alpha^2") {
    const double alpha = 0.5, tau = 1.0;
    const BridgeSampler b(alpha, 0.0, tau, 256);
    const auto var = b.variances();
    const auto t = b.times();
    for (std::size_t i : {32ul, 128ul, 200ul}) {
        const double s = t[i];
        const double G = std::sinh(alpha * s) * std::sinh(alpha * (tau - s)) / (alpha * std::sinh(alpha * tau));
        CHECK(var[i] == doctest::Approx(2.0 * G).epsilon(1e-4));
    }
}

TEST_CASE("sampled bridges have the right moments") {
    const std::size_t n = 20000;
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const OUBridge b = sample_ou_bridge(0.5, 0.0, 1.0, 16, 7, k);
        CHECK(b.values.front() == 0.0);
        CHECK(b.values.back() == 0.0);
        s1 += b.values[8];
        s2 += b.values[8] * b.values[8];
    }
    const double mean = s1 / n, var = s2 / n - mean * mean;
    const BridgeSampler ref(0.5, 0.0, 1.0, 16);
    CHECK(std::abs(mean) < 4.0 * std::sqrt(ref.variances()[8] / n));
    CHECK(var == doctest::Approx(ref.variances()[8]).epsilon(0.05));
}

TEST_CASE("zero potential gives weight exactly one") {
    const std::vector<KernelPoint> pts{{0.0, 0.0}, {1.0, -1.0}};
    const auto est = fk_kernel_estimate([](double, double) { return 0.0; }, 0.5, 0.0, 1.0, pts, 500, 42);
    for (const auto& e : est) {
        CHECK(e.weight.mean == 1.0);
        CHECK(e.weight.std_error == 0.0);
        CHECK(e.U == e.U0);
    }
}

TEST_CASE("estimates are reproducible from the seed") {
    const std::vector<KernelPoint> pts{{0.5, -0.5}};
    const Potential V = [](double y, double) { return profile_potential(y, 3.0, 0.5, 0.05); };
    const auto a = fk_kernel_estimate(V, 0.5, 0.0, 1.0, pts, 2000, 42);
    const auto b = fk_kernel_estimate(V, 0.5, 0.0, 1.0, pts, 2000, 42);
    const auto c = fk_kernel_estimate(V, 0.5, 0.0, 1.0, pts, 2000, 43);
    CHECK(a[0].weight.mean == b[0].weight.mean);
    CHECK(a[0].weight.std_error == b[0].weight.std_error);
    CHECK(a[0].weight.mean != c[0].weight.mean);
    CHECK(a[0].weight.mean < 1.0);
}

TEST_CASE("constant potential is an exact exponential") {
    const std::vector<KernelPoint> pts{{0.3, 0.1}};
    const auto est = fk_kernel_estimate([](double, double) { return 0.2; }, 0.5, 0.0, 1.5, pts, 100, 1);
    CHECK(est[0].weight.mean == doctest::Approx(std::exp(-0.3)).epsilon(1e-12));
}

TEST_CASE("derivative bound on a short horizon") {
    const Potential V = [](double y, double) { return profile_potential(y, 3.0, 0.5, 0.05); };
    const double K = profile_potential_gradient_bound(3.0, 0.5, 0.05);
    const std::vector<double> r{0.25, 0.5};
    const std::vector<KernelPoint> pts{{0.0, 0.5}, {0.5, 1.0}};
    const auto rep = derivative_bound_check(V, K, 0.5, r, pts, 4000, 42);
    CHECK(rep.ok);
    CHECK(rep.rows.size() == 4);
}

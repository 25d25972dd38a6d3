#include "blowup/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "blowup/error.hpp"
#include "blowup/numerics.hpp"

namespace blowup {

namespace {

constexpr double kPi = std::numbers::pi;

struct SplitTerms {
    Vec2 G{};
    Mat2 J{};
};

/// One pass over the grid for G and (optionally) its Jacobian.
SplitTerms split_terms(const Field& v, double p, double a, double b, double l, bool want_jacobian) {
    if (!(a > 0.0)) throw NeighborhoodExit("splitting needs a > 0");
    const double c = (a - 0.5 * (1.0 - l)) / l;
    if (!(c > 0.0)) throw NeighborhoodExit("splitting needs c > 0");
    const Grid& g = v.grid;
    const double h = g.spacing();
    const double n0 = std::pow(a / (2.0 * kPi), 0.25);
    const double n2 = std::pow(a / (8.0 * kPi), 0.25);
    const double e = 1.0 / (p - 1.0);
    SplitTerms t;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = g.node(i), y2 = y * y;
        const double gauss = std::exp(-0.5 * a * y2);
        if (gauss == 0.0) continue;
        const double wq = (i == 0 || i + 1 == g.size()) ? 0.5 * h : h;
        const double den = p - 1.0 + b * y2;
        const double V = std::pow(2.0 * c / den, e);
        const double W0 = n0 * gauss;
        const double W2 = n2 * (1.0 - a * y2) * gauss;
        const double diff = V - v.values[i];
        t.G[0] += wq * diff * W0;
        t.G[1] += wq * diff * W2;
        if (!want_jacobian) continue;
        const double dVa = V / ((p - 1.0) * c * l);
        const double dVb = -V * y2 / ((p - 1.0) * den);
        const double s = 0.25 / a - 0.5 * y2;
        const double dW0 = W0 * s;
        const double dW2 = W2 * s - n2 * y2 * gauss;
        t.J[0][0] += wq * (dVa * W0 + diff * dW0);
        t.J[1][0] += wq * (dVa * W2 + diff * dW2);
        t.J[0][1] += wq * dVb * W0;
        t.J[1][1] += wq * dVb * W2;
    }
    return t;
}

double cond2(const Mat2& J) {
    const double a = J[0][0], b = J[0][1], c = J[1][0], d = J[1][1];
    const double s1 = a * a + b * b + c * c + d * d;
    const double det = std::abs(a * d - b * c);
    const double disc = std::sqrt(std::max(0.0, s1 * s1 - 4.0 * det * det));
    const double smax = std::sqrt(0.5 * (s1 + disc));
    const double smin2 = 0.5 * (s1 - disc);
    if (smin2 <= 0.0) return std::numeric_limits<double>::infinity();
    return smax / std::sqrt(smin2);
}

double norm_inf(const Vec2& g) { return std::max(std::abs(g[0]), std::abs(g[1])); }

}  // namespace

Vec2 split_residual(const Field& v, double p, double a, double b, double l) {
    return split_terms(v, p, a, b, l, false).G;
}

Mat2 split_jacobian(const Field& v, double p, double a, double b, double l) {
    return split_terms(v, p, a, b, l, true).J;
}

SplitResult solve_g(const Field& v, double p, double a0, double b0, const SplitOptions& opt) {
    if (!(b0 > 0.0)) throw NeighborhoodExit("initial guess needs b > 0");
    double a = a0, b = b0;
    std::vector<double> history;
    SplitResult res{ProfileParams{}, Field(v.grid), Field(v.grid)};
    SplitTerms t = split_terms(v, p, a, b, opt.l, true);
    int it = 0;
    for (; norm_inf(t.G) >= opt.tol; ++it) {
        history.push_back(norm_inf(t.G));
        if (it >= opt.max_iter) throw ConvergenceFailure("splitting Newton did not converge", history);
        const Mat2& J = t.J;
        Vec2 step{};
        if (cond2(J) <= opt.cond_limit) {
            const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
            step[0] = (J[1][1] * t.G[0] - J[0][1] * t.G[1]) / det;
            step[1] = (-J[1][0] * t.G[0] + J[0][0] * t.G[1]) / det;
        } else {
            // Damped least squares: (J^T J + nu I) step = J^T G.
            res.damped = true;
            const double jtj00 = J[0][0] * J[0][0] + J[1][0] * J[1][0];
            const double jtj01 = J[0][0] * J[0][1] + J[1][0] * J[1][1];
            const double jtj11 = J[0][1] * J[0][1] + J[1][1] * J[1][1];
            const double nu = 1e-8 * (jtj00 + jtj11);
            const double r0 = J[0][0] * t.G[0] + J[1][0] * t.G[1];
            const double r1 = J[0][1] * t.G[0] + J[1][1] * t.G[1];
            const double m00 = jtj00 + nu, m11 = jtj11 + nu;
            const double det = m00 * m11 - jtj01 * jtj01;
            step[0] = (m11 * r0 - jtj01 * r1) / det;
            step[1] = (-jtj01 * r0 + m00 * r1) / det;
        }
        // Backtrack until the residual decreases and b stays positive.
        double theta = 1.0;
        SplitTerms trial;
        bool accepted = false;
        for (int k = 0; k < 30; ++k, theta *= 0.5) {
            const double na = a - theta * step[0], nb = b - theta * step[1];
            if (!(nb > 0.0) || !(na > 0.0)) continue;
            try {
                trial = split_terms(v, p, na, nb, opt.l, true);
            } catch (const NeighborhoodExit&) {
                continue;
            }
            if (norm_inf(trial.G) < norm_inf(t.G) || k == 29) {
                a = na;
                b = nb;
                accepted = true;
                break;
            }
        }
        if (!accepted) throw NeighborhoodExit("splitting drove b <= 0 (left the neighbourhood)");
        if (theta < 1.0) res.damped = true;
        t = trial;
    }

    res.params = ProfileParams::from_a(a, b, opt.l);
    res.iterations = it;
    res.in_window = a >= opt.a_min && a <= opt.a_max;
    const Field V = profile(ProfileKind::V_ab, res.params, p, v.grid);
    res.deviation = v - V;
    res.deviation.parity = v.parity;
    res.xi = res.deviation;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double y = v.grid.node(i);
        res.xi.values[i] *= std::exp(-0.25 * a * y * y);
    }
    res.ortho0 = l2_inner(res.xi, hermite_phi(0, a, v.grid));
    res.ortho2 = l2_inner(res.xi, hermite_phi(2, a, v.grid));
    return res;
}

double beta_of_tau(double tau, double b_initial, double p) {
    return 1.0 / (1.0 / b_initial + 4.0 * p * tau / ((p - 1.0) * (p - 1.0)));
}

double kappa_of_p(double p) { return std::min(0.5, 0.5 * (p - 1.0)); }

SplitSample summarize_split(const SplitResult& s, double tau, double p, double b_initial,
                            std::span<const double> cutoffs) {
    SplitSample out;
    out.tau = tau;
    out.a = s.params.a;
    out.b = s.params.b;
    out.c = s.params.c;
    out.dev_weighted = weighted_sup_norm(s.deviation, WeightSpec{3, 0.0});
    out.ortho0 = s.ortho0;
    out.ortho2 = s.ortho2;
    out.iterations = s.iterations;
    const double beta = beta_of_tau(tau, b_initial, p);
    const Grid& g = s.deviation.grid;
    for (double cd : cutoffs) {
        const double D = cd / std::sqrt(beta);
        double m = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (std::abs(g.node(i)) >= D) m = std::max(m, std::abs(s.deviation.values[i]));
        out.tail_sup.push_back(m);
        out.tail_covered.push_back(D < g.half_width() ? 1.0 : 0.0);
    }
    return out;
}

MajorantSeries compute_majorants(std::span<const SplitSample> history, double p, double b_initial,
                                 std::size_t cutoff_index, double C_D) {
    MajorantSeries m;
    m.C_D = C_D;
    m.kappa = kappa_of_p(p);
    double r1 = 0.0, r2 = 0.0, ra = 0.0, rb = 0.0;
    std::size_t covered = 0;
    for (const auto& s : history) {
        const double beta = beta_of_tau(s.tau, b_initial, p);
        const double m1 = s.dev_weighted / (beta * beta);
        const double m2 = cutoff_index < s.tail_sup.size() ? s.tail_sup[cutoff_index] : 0.0;
        const double aa = std::abs(s.a - 0.5 + 2.0 * s.b / (p - 1.0)) / (beta * beta);
        const double bb = std::abs(s.b - beta) / std::pow(beta, 1.0 + m.kappa);
        r1 = std::max(r1, m1);
        r2 = std::max(r2, m2);
        ra = std::max(ra, aa);
        rb = std::max(rb, bb);
        if (cutoff_index < s.tail_covered.size() && s.tail_covered[cutoff_index] > 0.0) ++covered;
        m.tau.push_back(s.tau);
        m.beta.push_back(beta);
        m.D.push_back(C_D / std::sqrt(beta));
        m.M1_inst.push_back(m1);
        m.M2_inst.push_back(m2);
        m.A_inst.push_back(aa);
        m.B_inst.push_back(bb);
        m.M1.push_back(r1);
        m.M2.push_back(r2);
        m.A.push_back(ra);
        m.B.push_back(rb);
    }
    if (!history.empty()) m.cutoff_coverage = static_cast<double>(covered) / static_cast<double>(history.size());
    return m;
}

double gamma0(double a, double b, double c, double c_tau, double p) {
    return -c_tau / c + 2.0 * (c - a) - 2.0 * b / (p - 1.0);
}

double gamma1(double a, double b, double c, double b_tau, double p) {
    if (a == 0.0) throw DomainError("Gamma_1 needs a != 0");
    const double q = p - 1.0;
    return (b_tau - 2.0 * b * (c - a) + 2.0 * (3.0 * p - 1.0) * b * b / (q * q)) / (a * q);
}

double remainder_b(double a, double b, double c, double b_tau, double p) {
    const double q = p - 1.0;
    return b_tau + 2.0 * (3.0 * p - 1.0) * b * b / (q * q) - 2.0 * b * (c - a);
}

double remainder_c(double a, double b, double c, double c_tau, double p) {
    return c_tau / c - 2.0 * (c - a) + 2.0 * b / (p - 1.0);
}

EffectiveRHS compute_gammas(std::span<const double> tau, std::span<const double> a, std::span<const double> b,
                            std::span<const double> c, double p, double l) {
    const std::size_t n = tau.size();
    if (a.size() != n || b.size() != n || c.size() != n || n < 5)
        throw DomainError("parameter history needs >= 5 aligned samples");
    const double dtau = (tau[n - 1] - tau[0]) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(tau[i] - tau[i - 1] - dtau) > 1e-6 * dtau)
            throw DomainError("parameter history must be uniformly sampled in tau");
    EffectiveRHS r;
    r.tau.assign(tau.begin(), tau.end());
    r.b_tau = smoothed_derivative(b, dtau);
    r.c_tau = smoothed_derivative(c, dtau);
    r.a_tau.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.a_tau[i] = l * r.c_tau[i];
        r.Gamma0.push_back(gamma0(a[i], b[i], c[i], r.c_tau[i], p));
        r.Gamma1.push_back(gamma1(a[i], b[i], c[i], r.b_tau[i], p));
        r.R_b.push_back(remainder_b(a[i], b[i], c[i], r.b_tau[i], p));
        r.R_c.push_back(remainder_c(a[i], b[i], c[i], r.c_tau[i], p));
    }
    return r;
}

Field evaluate_F(const ProfileParams& pp, double Gamma0, double Gamma1, double p, const Grid& g) {
    const double q = p - 1.0;
    const double a = pp.a, b = pp.b;
    return Field::sample(g, [&](double y) {
        const double y2 = y * y;
        const double den = q + b * y2;
        const double bracket = Gamma0 + Gamma1 * q * a * y2 / den -
                               4.0 * p * b * b * b * y2 * y2 / (q * q * den * den);
        return bracket / q * profile_value(ProfileKind::v_abc, pp, p, y);
    }, Parity::even);
}

namespace {
/// Bracket of N written in ungauged variables: zeta = e^{a y^2/4} xi, V = V_ab.
double n_bracket(double zeta, double V, double p) {
    const double s = zeta + V;
    return std::pow(std::abs(s), p - 1.0) * s - std::pow(V, p) - p * std::pow(V, p - 1.0) * zeta;
}
}  // namespace

Field evaluate_N(const Field& xi, const ProfileParams& pp, double p) {
    Field out(xi.grid, xi.parity);
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const double y = xi.grid.node(i);
        const double g = std::exp(-0.25 * pp.a * y * y);
        if (xi.values[i] == 0.0 || g == 0.0) continue;
        const double zeta = xi.values[i] / g;
        const double V = profile_value(ProfileKind::V_ab, pp, p, y);
        out.values[i] = g * n_bracket(zeta, V, p);
    }
    return out;
}

double nonlinearity_constant(const Field& xi, const ProfileParams& pp, double p) {
    double c = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const double y = xi.grid.node(i);
        const double g = std::exp(-0.25 * pp.a * y * y);
        if (xi.values[i] == 0.0 || g == 0.0) continue;
        const double zeta = xi.values[i] / g;
        const double V = profile_value(ProfileKind::V_ab, pp, p, y);
        // The Gaussian factor is common to both sides and cancels.
        const double rhs = zeta * zeta + std::pow(std::abs(zeta), p);
        if (rhs > 0.0) c = std::max(c, std::abs(n_bracket(zeta, V, p)) / rhs);
    }
    return c;
}

}  // namespace blowup

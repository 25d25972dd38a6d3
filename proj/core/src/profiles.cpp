#include "blowup/profiles.hpp"

#include <cmath>
#include <numbers>

#include "blowup/error.hpp"
#include "blowup/numerics.hpp"

namespace blowup {

double profile_value(ProfileKind kind, const ProfileParams& pp, double p, double y) {
    if (!(p > 1.0)) throw DomainError("profile needs p > 1");
    const double e = 1.0 / (p - 1.0);
    switch (kind) {
        case ProfileKind::v_a: return std::pow(2.0 * pp.a / (p - 1.0), e);
        case ProfileKind::v_ab:
        case ProfileKind::V_ab:
        case ProfileKind::v_abc: {
            const double den = p - 1.0 + pp.b * y * y;
            if (!(den > 0.0)) throw DomainError("profile denominator p-1+b y^2 <= 0");
            const double num = kind == ProfileKind::v_ab ? pp.a : pp.c;
            const double v = std::pow(2.0 * num / den, e);
            return kind == ProfileKind::v_abc ? v * std::exp(-0.25 * pp.a * y * y) : v;
        }
    }
    return 0.0;
}

Field profile(ProfileKind kind, const ProfileParams& pp, double p, const Grid& g) {
    return Field::sample(g, [&](double y) { return profile_value(kind, pp, p, y); }, Parity::even);
}

double hermite_value(int n, double a, double y) {
    if (n < 0) throw DomainError("Hermite index must be >= 0");
    const double x = std::sqrt(a) * y;
    double h0 = 1.0, h1 = x;
    double hn = n == 0 ? h0 : h1;
    for (int k = 1; k < n; ++k) {
        const double h2 = x * h1 - k * h0;
        h0 = h1;
        h1 = h2;
        hn = h2;
    }
    double fact = 1.0;
    for (int k = 2; k <= n; ++k) fact *= k;
    const double norm = std::pow(a / (2.0 * std::numbers::pi), 0.25) / std::sqrt(fact);
    const double sign = n == 2 ? -1.0 : 1.0;
    return sign * norm * hn * std::exp(-0.25 * a * y * y);
}

Field hermite_phi(int n, double a, const Grid& g) {
    if (!(a > 0.0)) throw DomainError("Hermite scale must be positive");
    return Field::sample(g, [&](double y) { return hermite_value(n, a, y); },
                         n % 2 == 0 ? Parity::even : Parity::odd);
}

std::string to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::L_abc: return "L_abc";
        case OperatorKind::L0_a: return "L0_a";
        case OperatorKind::L0_shifted: return "L0_shifted";
        case OperatorKind::L_alpha: return "L_alpha";
    }
    return "unknown";
}

std::function<double(double)> operator_potential(OperatorKind kind, const OperatorParams& op) {
    const double p = op.p;
    switch (kind) {
        case OperatorKind::L_abc: {
            const double a = op.prof.a, b = op.prof.b, c = op.prof.c, at = op.a_tau;
            return [=](double y) {
                return 0.25 * (a * a + at) * y * y - 0.5 * a + 2.0 * a / (p - 1.0) -
                       2.0 * p * c / (p - 1.0 + b * y * y);
            };
        }
        case OperatorKind::L0_a: {
            const double a = op.prof.a;
            return [=](double y) { return 0.25 * a * a * y * y - 0.5 * a; };
        }
        case OperatorKind::L0_shifted: {
            const double al = op.alpha;
            return [=](double z) { return 0.25 * al * al * z * z - 2.5 * al; };
        }
        case OperatorKind::L_alpha: {
            const double al = op.alpha, be = op.beta;
            return [=](double z) {
                return 0.25 * al * al * z * z - 2.5 * al + 2.0 * p * al / (p - 1.0) -
                       2.0 * p * al / (p - 1.0 + be * z * z);
            };
        }
    }
    throw DomainError("unknown operator kind");
}

OperatorMatrix assemble(OperatorKind kind, const OperatorParams& op, const Grid& g) {
    OperatorMatrix m;
    m.kind = kind;
    m.params = op;
    m.grid = g;
    const double h = g.spacing();
    const auto pot = operator_potential(kind, op);
    m.diag.resize(g.size() - 2);
    for (std::size_t i = 1; i + 1 < g.size(); ++i) m.diag[i - 1] = 2.0 / (h * h) + pot(g.node(i));
    m.off = -1.0 / (h * h);
    return m;
}

Field OperatorMatrix::apply(const Field& f) const {
    if (!(f.grid == grid)) throw GridMismatch();
    Field out(grid, f.parity);
    const std::size_t n = grid.size();
    for (std::size_t i = 1; i + 1 < n; ++i)
        out.values[i] = diag[i - 1] * f.values[i] + off * (f.values[i - 1] + f.values[i + 1]);
    return out;
}

Spectrum eigen_spectrum(const OperatorMatrix& op, std::size_t k, bool want_vectors) {
    const auto off = op.offdiag();
    const SymTridiagEigen e = sym_tridiag_lowest(op.diag, off, k, want_vectors);
    Spectrum s;
    s.values = e.values;
    s.residuals = e.residuals;
    const double scale = 1.0 / std::sqrt(op.grid.spacing());
    for (const auto& v : e.vectors) {
        Field f(op.grid);
        double vmax = 0.0;
        for (double x : v) vmax = std::max(vmax, std::abs(x));
        double sign = 1.0;
        for (double x : v)
            if (std::abs(x) > 1e-3 * vmax) {
                sign = x > 0.0 ? 1.0 : -1.0;
                break;
            }
        for (std::size_t i = 0; i < v.size(); ++i) f.values[i + 1] = sign * scale * v[i];
        s.vectors.push_back(std::move(f));
    }
    return s;
}

std::vector<double> extrapolated_eigenvalues(const OperatorMatrix& op, std::size_t k) {
    const auto coarse = eigen_spectrum(op, k, false).values;
    const auto fine = eigen_spectrum(assemble(op.kind, op.params, op.grid.refined()), k, false).values;
    std::vector<double> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
    return out;
}

EigenBoundReport check_eigen_bounds(double p, const ProfileParams& pp, std::span<const double> spectrum,
                                    double slack) {
    if (!(p > 1.0) || pp.b < 0.0 || pp.c < 0.0) throw DomainError("bounds need p > 1, b >= 0, c >= 0");
    EigenBoundReport r;
    r.slack = slack;
    for (std::size_t n = 0; n < spectrum.size(); ++n) {
        EigenBoundRow row;
        row.n = static_cast<int>(n);
        row.lambda = spectrum[n];
        row.upper = static_cast<double>(n) * pp.a + 2.0 * pp.a / (p - 1.0);
        row.lower = static_cast<double>(n) * pp.a + 2.0 * (pp.a - p * pp.c) / (p - 1.0);
        row.margin = std::min(row.lambda - row.lower, row.upper - row.lambda);
        if (row.margin < -slack) {
            r.ok = false;
            r.violations.push_back(row);
        }
        r.rows.push_back(row);
    }
    return r;
}

Field project_P(double alpha, const Field& f, ProjectionPart which) {
    if (!(alpha > 0.0)) throw DomainError("projection scale must be positive");
    Field low(f.grid, f.parity);
    for (int n = 0; n <= 2; ++n) {
        const Field phi = hermite_phi(n, alpha, f.grid);
        const double c = l2_inner(phi, f);
        for (std::size_t i = 0; i < f.size(); ++i) low.values[i] += c * phi.values[i];
    }
    if (which == ProjectionPart::low) return low;
    Field comp = f;
    for (std::size_t i = 0; i < f.size(); ++i) comp.values[i] -= low.values[i];
    return comp;
}

}  // namespace blowup

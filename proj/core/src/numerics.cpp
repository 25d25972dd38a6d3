#include "blowup/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "blowup/error.hpp"

namespace blowup {

std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> sup, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n), x(n);
    double denom = diag[0];
    if (denom == 0.0) throw ConvergenceFailure("tridiagonal solve: zero pivot at row 0");
    c[0] = n > 1 ? sup[0] / denom : 0.0;
    x[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - sub[i] * c[i - 1];
        if (denom == 0.0 || !std::isfinite(denom))
            throw ConvergenceFailure("tridiagonal solve: zero pivot at row " + std::to_string(i));
        c[i] = i + 1 < n ? sup[i] / denom : 0.0;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
    return x;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    LineFit r;
    r.count = x.size();
    if (x.size() != y.size() || x.size() < 2) throw DomainError("line fit needs >= 2 paired samples");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw DomainError("line fit: degenerate abscissae");
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (r.slope * x[i] + r.intercept);
        ss += e * e;
    }
    r.rms_residual = std::sqrt(ss / n);
    return r;
}

std::vector<double> smoothed_derivative(std::span<const double> f, double dx) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) return d;
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n) {
            d[i] = (-2.0 * f[i - 2] - f[i - 1] + f[i + 1] + 2.0 * f[i + 2]) / (10.0 * dx);
        } else if (i == 0) {
            d[i] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
        } else if (i == n - 1) {
            d[i] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
        } else {
            d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
        }
    }
    return d;
}

std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double x) {
    std::size_t count = 0;
    double q = diag[0] - x;
    const double tiny = std::numeric_limits<double>::min();
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        if (std::abs(q) < tiny) q = tiny;
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

namespace {

double bisect_eigenvalue(std::span<const double> diag, std::span<const double> off, std::size_t j,
                         double lo, double hi) {
    // Invariant: count(lo) <= j < count(hi).
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(diag, off, mid) > j) hi = mid; else lo = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
            break;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> inverse_iteration(std::span<const double> diag, std::span<const double> off,
                                      double lambda, const std::vector<std::vector<double>>& previous,
                                      double shift_scale) {
    const std::size_t n = diag.size();
    std::vector<double> sub(n, 0.0), dg(n), sup(n, 0.0);
    const double shifted = lambda + shift_scale;
    for (std::size_t i = 0; i < n; ++i) dg[i] = diag[i] - shifted;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        sup[i] = off[i];
        sub[i + 1] = off[i];
    }
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
    for (int it = 0; it < 4; ++it) {
        // Orthogonalize against earlier vectors; guards nearly degenerate pairs.
        for (const auto& p : previous) {
            const double d = std::inner_product(v.begin(), v.end(), p.begin(), 0.0);
            for (std::size_t i = 0; i < n; ++i) v[i] -= d * p[i];
        }
        v = solve_tridiagonal(sub, dg, sup, v);
        const double nrm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        for (double& x : v) x /= nrm;
    }
    return v;
}

}  // namespace

SymTridiagEigen sym_tridiag_lowest(std::span<const double> diag, std::span<const double> off,
                                   std::size_t k, bool want_vectors) {
    const std::size_t n = diag.size();
    if (k > n) throw DomainError("requested more eigenvalues than the matrix dimension");
    if (off.size() + 1 != n) throw DomainError("off-diagonal length must be n - 1");
    double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    const double pad = 1e-12 * std::max(1.0, hi - lo);
    lo -= pad;
    hi += pad;

    SymTridiagEigen out;
    for (std::size_t j = 0; j < k; ++j) out.values.push_back(bisect_eigenvalue(diag, off, j, lo, hi));
    if (!want_vectors) return out;

    const double scale = std::max(1.0, hi - lo);
    for (std::size_t j = 0; j < k; ++j) {
        const double lam = out.values[j];
        // Perturb the shift slightly so the shifted matrix is not exactly singular.
        auto v = inverse_iteration(diag, off, lam, out.vectors, 1e-13 * scale);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double av = diag[i] * v[i];
            if (i > 0) av += off[i - 1] * v[i - 1];
            if (i + 1 < n) av += off[i] * v[i + 1];
            res += (av - lam * v[i]) * (av - lam * v[i]);
        }
        out.residuals.push_back(std::sqrt(res));
        out.vectors.push_back(std::move(v));
    }
    return out;
}

}  // namespace blowup

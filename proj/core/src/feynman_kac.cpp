#include "blowup/feynman_kac.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "blowup/error.hpp"
#include "blowup/numerics.hpp"

namespace blowup {

namespace {
constexpr double kPi = std::numbers::pi;
}

double profile_potential(double y, double p, double alpha, double beta) {
    const double q = p - 1.0;
    const double A = 2.0 * p * alpha / q;
    return A - A * q / (q + beta * y * y);
}

double profile_potential_gradient_bound(double p, double alpha, double beta) {
    // |V'| = 2 A q beta |y| / (q + beta y^2)^2 peaks at y^2 = q / (3 beta).
    const double q = p - 1.0;
    const double A = 2.0 * p * alpha / q;
    return A * 9.0 / 8.0 * std::sqrt(beta / (3.0 * q));
}

double mehler_unnormalised_prefactor(double alpha, double r) {
    return 4.0 * kPi * std::sqrt(alpha) / std::sqrt(-std::expm1(-2.0 * alpha * r));
}

double mehler_standard_prefactor(double alpha, double r) {
    return std::sqrt(alpha / (2.0 * kPi * -std::expm1(-2.0 * alpha * r)));
}

double mehler_kernel_U0(double alpha, double r, double x, double y, double prefactor) {
    if (!(alpha > 0.0)) throw DomainError("Mehler kernel needs alpha > 0");
    if (!(r > 0.0)) throw DomainError("Mehler kernel needs r > 0");
    if (prefactor <= 0.0) prefactor = mehler_standard_prefactor(alpha, r);
    const double q = std::exp(-alpha * r);
    const double d = -std::expm1(-2.0 * alpha * r);
    const double u = x - q * y;
    return prefactor * std::exp(2.0 * alpha * r - alpha * u * u / (2.0 * d));
}

double omega0(double alpha, double sigma, double tau, double x, double y, double s) {
    if (!(tau > sigma)) throw DomainError("omega0 needs tau > sigma");
    const double den = std::sinh(alpha * (tau - sigma));
    if (den == 0.0) {
        const double w = (s - sigma) / (tau - sigma);
        return w * x + (1.0 - w) * y;
    }
    return (x * std::sinh(alpha * (s - sigma)) + y * std::sinh(alpha * (tau - s))) / den;
}

std::vector<double> omega0_path(double alpha, double sigma, double tau, double x, double y, std::size_t n_steps) {
    if (n_steps < 1) throw DomainError("omega0 path needs at least one step");
    std::vector<double> w(n_steps + 1);
    const double dt = (tau - sigma) / static_cast<double>(n_steps);
    for (std::size_t k = 0; k <= n_steps; ++k) w[k] = omega0(alpha, sigma, tau, x, y, sigma + dt * static_cast<double>(k));
    w.front() = y;
    w.back() = x;
    return w;
}

BridgeSampler::BridgeSampler(double alpha, double sigma, double tau, std::size_t n_steps)
    : alpha_(alpha), sigma_(sigma), tau_(tau), n_(n_steps) {
    if (n_steps < 2) throw DomainError("bridge needs n_steps >= 2");
    if (!(tau > sigma)) throw DomainError("bridge needs tau > sigma");
    dt_ = (tau - sigma) / static_cast<double>(n_steps);
    const std::size_t m = n_steps - 1;
    const double d = 0.5 * (2.0 / dt_ + alpha * alpha * dt_);
    const double o = -0.5 / dt_;
    ldiag_.resize(m);
    lsub_.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double piv = d;
        if (i > 0) {
            lsub_[i] = o / ldiag_[i - 1];
            piv -= lsub_[i] * lsub_[i];
        }
        if (!(piv > 0.0)) throw ConvergenceFailure("bridge precision matrix is not positive definite");
        ldiag_[i] = std::sqrt(piv);
    }
}

std::vector<double> BridgeSampler::times() const {
    std::vector<double> t(n_ + 1);
    for (std::size_t k = 0; k <= n_; ++k) t[k] = sigma_ + dt_ * static_cast<double>(k);
    t.back() = tau_;
    return t;
}

void BridgeSampler::transform(std::span<const double> z, std::span<double> out) const {
    const std::size_t m = n_ - 1;
    out[0] = 0.0;
    out[n_] = 0.0;
    // Solve L^T x = z, so that x has covariance (L L^T)^{-1}.
    double next = 0.0;
    for (std::size_t k = m; k-- > 0;) {
        const double up = k + 1 < m ? lsub_[k + 1] * next : 0.0;
        next = (z[k] - up) / ldiag_[k];
        out[k + 1] = next;
    }
}

std::vector<double> BridgeSampler::variances() const {
    const std::size_t m = n_ - 1;
    std::vector<double> var(n_ + 1, 0.0), col(m);
    // Column j of Q^{-1}: forward then backward substitution with the Cholesky factor.
    for (std::size_t j = 0; j < m; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[j] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double lo = i > 0 ? lsub_[i] * col[i - 1] : 0.0;
            col[i] = (col[i] - lo) / ldiag_[i];
        }
        for (std::size_t i = m; i-- > 0;) {
            const double up = i + 1 < m ? lsub_[i + 1] * col[i + 1] : 0.0;
            col[i] = (col[i] - up) / ldiag_[i];
        }
        var[j + 1] = col[j];
    }
    return var;
}

namespace {

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

void draw_normals(std::mt19937_64& rng, std::span<double> z) {
    std::normal_distribution<double> nd(0.0, 1.0);
    for (double& v : z) v = nd(rng);
}

/// Calls `sink(path, actions)` for each path; actions[j] = int V along point j's path.
template <class Sink>
void for_each_path(const Potential& V, double alpha, double sigma, double tau, std::span<const KernelPoint> points,
                   std::size_t n_paths, std::uint64_t seed, const FKOptions& opt, Sink&& sink) {
    const BridgeSampler bridge(alpha, sigma, tau, opt.n_steps);
    const std::size_t n = opt.n_steps;
    const double dt = bridge.dt();
    const std::vector<double> s = bridge.times();
    std::vector<std::vector<double>> base;
    base.reserve(points.size());
    for (const auto& pt : points) base.push_back(omega0_path(alpha, sigma, tau, pt.x, pt.y, n));
    std::vector<double> z(n - 1), w(n + 1), action(points.size());
    for (std::size_t path = 0; path < n_paths; ++path) {
        auto rng = path_stream(seed, path);
        draw_normals(rng, z);
        bridge.transform(z, w);
        for (std::size_t j = 0; j < points.size(); ++j) {
            // Trapezoid in s. Nodes are exact bridge samples, so the rule carries no
            // first-order bias: the interpolation error cancels the bridge variance.
            double sum = 0.0;
            for (std::size_t k = 0; k <= n; ++k) {
                const double wk = (k == 0 || k == n) ? 0.5 : 1.0;
                sum += wk * V(base[j][k] + w[k], s[k]);
            }
            action[j] = dt * sum;
        }
        sink(path, std::span<const double>(action));
    }
}

MCEstimate finish(double sum, double sum2, std::size_t count, std::size_t rejected, std::uint64_t seed) {
    MCEstimate m;
    m.count = count;
    m.rejected = rejected;
    m.seed = seed;
    if (count == 0) return m;
    const double n = static_cast<double>(count);
    m.mean = sum / n;
    if (count > 1) {
        const double var = std::max(0.0, (sum2 - n * m.mean * m.mean) / (n - 1.0));
        m.std_error = std::sqrt(var / n);
    }
    return m;
}

}  // namespace

OUBridge sample_ou_bridge(double alpha, double sigma, double tau, std::size_t n_steps, std::uint64_t seed,
                          std::uint64_t index) {
    const BridgeSampler b(alpha, sigma, tau, n_steps);
    OUBridge out{b.times(), std::vector<double>(n_steps + 1)};
    std::vector<double> z(n_steps - 1);
    auto rng = path_stream(seed, index);
    draw_normals(rng, z);
    b.transform(z, out.values);
    return out;
}

std::vector<FKPointEstimate> fk_kernel_estimate(const Potential& V, double alpha, double sigma, double tau,
                                                std::span<const KernelPoint> points, std::size_t n_paths,
                                                std::uint64_t seed, const FKOptions& opt) {
    const std::size_t m = points.size();
    std::vector<double> sum(m, 0.0), sum2(m, 0.0);
    std::vector<std::size_t> count(m, 0), rejected(m, 0);
    for_each_path(V, alpha, sigma, tau, points, n_paths, seed, opt, [&](std::size_t, std::span<const double> act) {
        for (std::size_t j = 0; j < m; ++j) {
            if (!(std::abs(act[j]) <= 700.0)) {
                ++rejected[j];
                continue;
            }
            const double w = std::exp(-act[j]);
            sum[j] += w;
            sum2[j] += w * w;
            ++count[j];
        }
    });
    std::vector<FKPointEstimate> out;
    for (std::size_t j = 0; j < m; ++j) {
        FKPointEstimate e;
        e.point = points[j];
        e.weight = finish(sum[j], sum2[j], count[j], rejected[j], seed);
        e.U0 = mehler_kernel_U0(alpha, tau - sigma, points[j].x, points[j].y, opt.prefactor);
        e.U = e.U0 * e.weight.mean;
        e.U_std_error = e.U0 * e.weight.std_error;
        out.push_back(e);
    }
    return out;
}

namespace {

struct GridKernel {
    std::vector<double> U, U0;
};

std::size_t node_index(double x, double h, std::size_t N) {
    const double k = std::round(x / h);
    if (std::abs(k * h - x) > 1e-9 * std::max(1.0, std::abs(x)))
        throw DomainError("kernel point is not a grid node");
    const long idx = static_cast<long>(k) + static_cast<long>(N / 2);
    if (idx < 1 || idx + 1 >= static_cast<long>(N)) throw DomainError("kernel point outside the interior");
    return static_cast<std::size_t>(idx) - 1;  // interior numbering
}

std::vector<double> dense_kernel(const std::vector<double>& pot, double h, double r,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& idx) {
    const Eigen::Index n = static_cast<Eigen::Index>(pot.size());
    Eigen::VectorXd diag(n), sub(n - 1);
    for (Eigen::Index i = 0; i < n; ++i) diag(i) = 2.0 / (h * h) + pot[static_cast<std::size_t>(i)];
    sub.setConstant(-1.0 / (h * h));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw ConvergenceFailure("dense eigensolver failed");
    const Eigen::VectorXd ex = (-r * es.eigenvalues().array()).exp();
    const Eigen::MatrixXd& Q = es.eigenvectors();
    std::vector<double> out;
    for (auto [i, j] : idx) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) s += Q(static_cast<Eigen::Index>(i), k) * ex(k) * Q(static_cast<Eigen::Index>(j), k);
        out.push_back(s / h);
    }
    return out;
}

GridKernel grid_kernel(const std::function<double(double)>& V, double alpha, double r,
                       std::span<const KernelPoint> points, double L, std::size_t N) {
    const double h = 2.0 * L / static_cast<double>(N - 1);
    std::vector<double> base(N - 2), withV(N - 2);
    for (std::size_t i = 0; i + 2 < N; ++i) {
        const double y = (static_cast<double>(i + 1) - static_cast<double>(N / 2)) * h;
        base[i] = alpha * alpha * y * y / 4.0 - 2.5 * alpha;
        withV[i] = base[i] + (V ? V(y) : 0.0);
    }
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (const auto& pt : points) idx.emplace_back(node_index(pt.x, h, N), node_index(pt.y, h, N));
    GridKernel g{dense_kernel(withV, h, r, idx), dense_kernel(base, h, r, idx)};
    for (std::size_t j = 0; j < points.size(); ++j) {
        const double c = std::exp(-alpha * points[j].x * points[j].x / 4.0 + alpha * points[j].y * points[j].y / 4.0);
        g.U[j] *= c;
        g.U0[j] *= c;
    }
    return g;
}

}  // namespace

DirectKernel direct_propagator_kernel(const std::function<double(double)>& V, double alpha, double r,
                                      std::span<const KernelPoint> points, double L, std::size_t N) {
    if (N % 2 == 0 || N < 5) throw DomainError("direct kernel needs an odd node count >= 5");
    const GridKernel coarse = grid_kernel(V, alpha, r, points, L, N);
    const GridKernel fine = grid_kernel(V, alpha, r, points, L, 2 * N - 1);
    DirectKernel d;
    d.points.assign(points.begin(), points.end());
    d.h = 2.0 * L / static_cast<double>(N - 1);
    for (std::size_t j = 0; j < points.size(); ++j) {
        d.U.push_back((4.0 * fine.U[j] - coarse.U[j]) / 3.0);
        d.U0.push_back((4.0 * fine.U0[j] - coarse.U0[j]) / 3.0);
        const double rf = fine.U[j] / fine.U0[j], rc = coarse.U[j] / coarse.U0[j];
        d.ratio.push_back((4.0 * rf - rc) / 3.0);
        d.ratio_fine.push_back(rf);
    }
    return d;
}

MehlerCalibration calibrate_mehler(double alpha, double r, std::span<const KernelPoint> points) {
    std::vector<KernelPoint> pts{{0.0, 0.0}};
    pts.insert(pts.end(), points.begin(), points.end());
    const DirectKernel d = direct_propagator_kernel({}, alpha, r, pts);
    MehlerCalibration c;
    c.alpha = alpha;
    c.r = r;
    const double raw = mehler_unnormalised_prefactor(alpha, r);
    c.constant = d.U0[0] / mehler_kernel_U0(alpha, r, 0.0, 0.0, raw);
    c.prefactor_ratio = 1.0 / c.constant;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const double model = mehler_kernel_U0(alpha, r, pts[j].x, pts[j].y, c.constant * raw);
        c.shape_error = std::max(c.shape_error, std::abs(model - d.U0[j]) / std::abs(d.U0[j]));
    }
    return c;
}

FKComparison compare_fk_direct(const std::function<double(double)>& V, double alpha, double r,
                               std::span<const KernelPoint> points, std::size_t n_paths, std::uint64_t seed,
                               double z_limit, const FKOptions& opt) {
    const DirectKernel d = direct_propagator_kernel(V, alpha, r, points);
    const Potential Vt = [&V](double y, double) { return V(y); };
    const auto mc = fk_kernel_estimate(Vt, alpha, 0.0, r, points, n_paths, seed, opt);
    FKComparison cmp;
    cmp.n_paths = n_paths;
    cmp.seed = seed;
    cmp.ok = true;
    for (std::size_t j = 0; j < points.size(); ++j) {
        FKComparisonRow row{points[j], mc[j].weight.mean, mc[j].weight.std_error, d.ratio[j], 0.0};
        const double diff = row.mc - row.direct;
        row.z = row.mc_se > 0.0 ? diff / row.mc_se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
        cmp.max_abs_z = std::max(cmp.max_abs_z, std::abs(row.z));
        if (!(std::abs(row.z) <= z_limit)) cmp.ok = false;
        cmp.rows.push_back(row);
    }
    return cmp;
}

DerivativeBoundReport derivative_bound_check(const Potential& V, double K, double alpha,
                                             std::span<const double> durations,
                                             std::span<const KernelPoint> points, std::size_t n_paths,
                                             std::uint64_t seed, double dy, std::size_t n_steps) {
    DerivativeBoundReport rep;
    rep.K = K;
    FKOptions opt;
    opt.n_steps = n_steps;
    for (double r : durations) {
        std::vector<KernelPoint> pm;
        for (const auto& pt : points) {
            pm.push_back({pt.x, pt.y + dy});
            pm.push_back({pt.x, pt.y - dy});
        }
        const std::size_t m = points.size();
        std::vector<double> sum(m, 0.0), sum2(m, 0.0);
        for_each_path(V, alpha, 0.0, r, pm, n_paths, seed, opt, [&](std::size_t, std::span<const double> act) {
            for (std::size_t j = 0; j < m; ++j) {
                const double d = (std::exp(-act[2 * j]) - std::exp(-act[2 * j + 1])) / (2.0 * dy);
                sum[j] += d;
                sum2[j] += d * d;
            }
        });
        for (std::size_t j = 0; j < m; ++j) {
            const MCEstimate e = finish(sum[j], sum2[j], n_paths, 0, seed);
            DerivativeBoundRow row;
            row.r = r;
            row.point = points[j];
            row.derivative = e.mean;
            row.std_error = e.std_error;
            row.bound = K * r + 3.0 * e.std_error;
            row.ok = std::abs(e.mean) <= row.bound;
            if (!row.ok) rep.ok = false;
            rep.rows.push_back(row);
        }
    }
    return rep;
}

namespace {

/// Finite-difference weights for derivative `order` at 0 from the given offsets (in units of h).
std::vector<double> fd_weights(const std::vector<double>& offsets, int order) {
    const std::size_t n = offsets.size();
    // Vandermonde system sum_k w_k o_k^j = j! delta_{j,order}.
    std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) A[j][k] = std::pow(offsets[k], static_cast<double>(j));
        A[j][n] = j == static_cast<std::size_t>(order) ? std::tgamma(order + 1.0) : 0.0;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
        }
    }
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) w[k] = A[k][n] / A[k][k];
    return w;
}

struct Stencil {
    std::vector<long> offsets;
    std::vector<double> d1, d2;
};

double hermite_poly(int n, double x) {
    double h0 = 1.0, h1 = x;
    if (n == 0) return h0;
    for (int k = 1; k < n; ++k) {
        const double h2 = x * h1 - k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

class DecaySystem {
public:
    DecaySystem(const DecayOptions& o) : o_(o), h_(2.0 * o.Z / static_cast<double>(o.N - 1)), z_(o.N) {
        if (o.N < 11 || o.N % 2 == 0) throw DomainError("decay grid needs an odd N >= 11");
        for (std::size_t i = 0; i < o.N; ++i) z_[i] = (static_cast<double>(i) - static_cast<double>(o.N / 2)) * h_;
        for (std::size_t i = 0; i < o.N; ++i) {
            std::vector<long> off;
            if (i < 2) {
                for (long k = 0; k < 6; ++k) off.push_back(k - static_cast<long>(i));
            } else if (i + 2 >= o.N) {
                const long back = static_cast<long>(o.N - 1 - i);
                for (long k = 0; k < 6; ++k) off.push_back(back - 5 + k);
            } else {
                off = {-2, -1, 0, 1, 2};
            }
            std::vector<double> of(off.begin(), off.end());
            Stencil s{off, fd_weights(of, 1), fd_weights(of, 2)};
            for (double& w : s.d1) w /= h_;
            for (double& w : s.d2) w /= h_ * h_;
            st_.push_back(std::move(s));
        }
        const double sa = std::sqrt(o.alpha);
        for (int n = 0; n <= 2; ++n) {
            std::vector<double> he(o.N), wt(o.N);
            double fact = 1.0;
            for (int k = 2; k <= n; ++k) fact *= k;
            for (std::size_t i = 0; i < o.N; ++i) {
                he[i] = hermite_poly(n, sa * z_[i]);
                const double trap = (i == 0 || i + 1 == o.N) ? 0.5 * h_ : h_;
                wt[i] = trap * he[i] * std::exp(-0.5 * o.alpha * z_[i] * z_[i]) * sa / (std::sqrt(2.0 * kPi) * fact);
            }
            he_.push_back(std::move(he));
            proj_.push_back(std::move(wt));
        }
    }

    const std::vector<double>& z() const { return z_; }
    double h() const { return h_; }

    void project(std::vector<double>& f) const {
        for (std::size_t n = 0; n < he_.size(); ++n) {
            double c = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) c += proj_[n][i] * f[i];
            for (std::size_t i = 0; i < f.size(); ++i) f[i] -= c * he_[n][i];
        }
    }

    double beta_at(double tau) const {
        if (o_.beta0 <= 0.0) return 0.0;
        return 1.0 / (1.0 / o_.beta0 + o_.beta_slope * tau);
    }

    void rhs(double tau, const std::vector<double>& f, std::vector<double>& out) const {
        std::vector<double> g = f;
        project(g);
        const double be = beta_at(tau);
        out.resize(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            const Stencil& s = st_[i];
            double d1 = 0.0, d2 = 0.0;
            for (std::size_t k = 0; k < s.offsets.size(); ++k) {
                const double v = g[static_cast<std::size_t>(static_cast<long>(i) + s.offsets[k])];
                d1 += s.d1[k] * v;
                d2 += s.d2[k] * v;
            }
            const double V = be > 0.0 ? profile_potential(z_[i], o_.p, o_.alpha, be) : 0.0;
            out[i] = d2 - o_.alpha * z_[i] * d1 + 2.0 * o_.alpha * g[i] - V * g[i];
        }
        project(out);
    }

    double weighted_norm(const std::vector<double>& f) const {
        double m = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]) * std::pow(1.0 + z_[i] * z_[i], -1.5));
        return m;
    }

    double stable_dt() const {
        const double A = 2.0 * o_.p * o_.alpha / (o_.p - 1.0);
        const double spec = 16.0 / (3.0 * h_ * h_) + 1.5 * o_.alpha * o_.Z / h_ + 2.0 * o_.alpha + A;
        return 1.0 / spec;
    }

private:
    DecayOptions o_;
    double h_;
    std::vector<double> z_;
    std::vector<Stencil> st_;
    std::vector<std::vector<double>> he_, proj_;
};

}  // namespace

std::vector<DecayTest> default_decay_tests(double alpha) {
    const double sa = std::sqrt(alpha);
    return {
        {"he3", [sa](double z) { return hermite_poly(3, sa * z); }},
        {"he3_he4", [sa](double z) { return hermite_poly(3, sa * z) + 0.5 * hermite_poly(4, sa * z); }},
        {"bump", [alpha](double z) { return (1.0 + z + z * z * z) * std::exp(-0.5 * z * z + 0.25 * alpha * z * z); }},
    };
}

DecayReport propagator_decay_check(const DecayOptions& opt, std::span<const DecayTest> tests) {
    const DecaySystem sys(opt);
    DecayReport rep;
    rep.alpha = opt.alpha;
    rep.threshold = opt.alpha - opt.epsilon;
    rep.min_exponent = INFINITY;
    const double dt0 = sys.stable_dt();
    const std::size_t steps = static_cast<std::size_t>(std::ceil(opt.horizon / dt0));
    const double dt = opt.horizon / static_cast<double>(steps);
    const std::size_t every = std::max<std::size_t>(1, steps / 200);
    for (const auto& test : tests) {
        std::vector<double> f(sys.z().size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = test.f(sys.z()[i]);
        sys.project(f);
        DecayTrace tr;
        tr.name = test.name;
        tr.tau.push_back(0.0);
        tr.norm.push_back(sys.weighted_norm(f));
        std::vector<double> k1, k2, k3, k4, tmp(f.size());
        for (std::size_t s = 0; s < steps; ++s) {
            const double t = dt * static_cast<double>(s);
            sys.rhs(t, f, k1);
            for (std::size_t i = 0; i < f.size(); ++i) tmp[i] = f[i] + 0.5 * dt * k1[i];
            sys.rhs(t + 0.5 * dt, tmp, k2);
            for (std::size_t i = 0; i < f.size(); ++i) tmp[i] = f[i] + 0.5 * dt * k2[i];
            sys.rhs(t + 0.5 * dt, tmp, k3);
            for (std::size_t i = 0; i < f.size(); ++i) tmp[i] = f[i] + dt * k3[i];
            sys.rhs(t + dt, tmp, k4);
            for (std::size_t i = 0; i < f.size(); ++i) f[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if ((s + 1) % every == 0 || s + 1 == steps) {
                const double nrm = sys.weighted_norm(f);
                if (!std::isfinite(nrm)) throw ConvergenceFailure("decay run produced a non-finite norm");
                tr.tau.push_back(t + dt);
                tr.norm.push_back(nrm);
            }
        }
        std::vector<double> x, y;
        for (std::size_t i = 0; i < tr.tau.size(); ++i) {
            if (tr.tau[i] < 0.5 * opt.horizon || !(tr.norm[i] > 0.0)) continue;
            x.push_back(tr.tau[i]);
            y.push_back(std::log(tr.norm[i]));
        }
        tr.exponent = x.size() >= 2 ? -fit_line(x, y).slope : 0.0;
        rep.min_exponent = std::min(rep.min_exponent, tr.exponent);
        rep.traces.push_back(std::move(tr));
    }
    rep.ok = !tests.empty() && rep.min_exponent >= rep.threshold;
    return rep;
}

}  // namespace blowup

#include "blowup/heat_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "blowup/error.hpp"
#include "blowup/numerics.hpp"

namespace blowup {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::horizon_reached: return "horizon-reached";
        case Termination::blowup_detected: return "blowup-detected";
        case Termination::step_underflow: return "step-underflow";
    }
    return "unknown";
}

namespace {

double power_term(double u, double p) { return std::pow(std::abs(u), p - 1.0) * u; }

struct Tridiag {
    std::vector<double> sub, diag, sup;
    explicit Tridiag(std::size_t n) : sub(n, 0.0), diag(n, 0.0), sup(n, 0.0) {}

    std::vector<double> apply(const std::vector<double>& x) const {
        const std::size_t n = diag.size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += sub[i] * x[i - 1];
            if (i + 1 < n) s += sup[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }
};

/// y <- (I - theta dt A)^{-1} (I + (1 - theta) dt A) x.
std::vector<double> theta_step(const Tridiag& A, const std::vector<double>& x, double dt, double theta) {
    std::vector<double> rhs = x;
    if (theta < 1.0) {
        const auto ax = A.apply(x);
        for (std::size_t i = 0; i < x.size(); ++i) rhs[i] += (1.0 - theta) * dt * ax[i];
    }
    const std::size_t n = x.size();
    std::vector<double> sub(n), dg(n), sup(n);
    for (std::size_t i = 0; i < n; ++i) {
        sub[i] = -theta * dt * A.sub[i];
        dg[i] = 1.0 - theta * dt * A.diag[i];
        sup[i] = -theta * dt * A.sup[i];
    }
    return solve_tridiagonal(sub, dg, sup, rhs);
}

/// Kernel taps K(k h) h / c for k = 0..m, normalised by the full-line discrete mass c.
std::vector<double> heat_taps(double t, double h, std::size_t max_lag) {
    const double reach = std::sqrt(4.0 * t * 45.0);
    const std::size_t m = std::min<std::size_t>(max_lag, static_cast<std::size_t>(std::ceil(reach / h)) + 1);
    std::vector<double> taps(m + 1);
    double total = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
        const double d = static_cast<double>(k) * h;
        taps[k] = std::exp(-d * d / (4.0 * t));
        total += (k == 0 ? 1.0 : 2.0) * taps[k];
    }
    for (double& v : taps) v /= total;
    return taps;
}

std::vector<double> convolve(const std::vector<double>& f, const std::vector<double>& taps) {
    const std::size_t n = f.size();
    const auto m = static_cast<long>(taps.size()) - 1;
    std::vector<double> out(n, 0.0);
    for (long i = 0; i < static_cast<long>(n); ++i) {
        double s = taps[0] * f[static_cast<std::size_t>(i)];
        for (long k = 1; k <= m; ++k) {
            if (i - k >= 0) s += taps[static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(i - k)];
            if (i + k < static_cast<long>(n)) s += taps[static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(i + k)];
        }
        out[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

}  // namespace

double reaction_flow(double u, double s, double p) {
    if (u == 0.0) return 0.0;
    const double base = 1.0 - (p - 1.0) * std::pow(std::abs(u), p - 1.0) * s;
    if (base <= 0.0) return std::copysign(std::numeric_limits<double>::infinity(), u);
    return u * std::pow(base, -1.0 / (p - 1.0));
}

double homogeneous_solution(double u0, double t, double p) {
    const double base = std::pow(u0, 1.0 - p) - (p - 1.0) * t;
    if (base <= 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(base, -1.0 / (p - 1.0));
}

Field heat_semigroup_apply(const Field& f, double t) {
    if (t < 0.0) throw DomainError("heat semigroup needs t >= 0");
    if (t == 0.0) return f;
    const auto taps = heat_taps(t, f.grid.spacing(), f.size());
    return Field(f.grid, convolve(f.values, taps), f.parity);
}

double local_existence_time(double p, double u0_sup) {
    if (u0_sup == 0.0) return 0.5;
    return 0.5 * std::min(1.0 / (std::pow(2.0 * p, p) * std::pow(u0_sup, p - 1.0)), 1.0);
}

double local_apriori_bound(double p, double u0_sup) {
    const double c = std::pow(2.0, 1.0 / p);
    return std::max(c * p * u0_sup, c * std::pow(u0_sup, 1.0 / p));
}

DuhamelResult duhamel_local_solve(const HeatProblem& prob, std::size_t time_slices, double slab,
                                  double tol, int max_iter) {
    const Field& u0 = prob.u0;
    if (!u0.all_finite()) throw DomainError("initial data must be finite");
    const double p = prob.p;
    const double sup0 = u0.sup_norm();

    DuhamelResult res;
    res.T_local = local_existence_time(p, sup0);
    res.apriori_bound = local_apriori_bound(p, sup0);
    const double T = slab > 0.0 ? slab : res.T_local;
    const std::size_t M = std::max<std::size_t>(time_slices, 1);
    const double ds = T / static_cast<double>(M);
    const double h = u0.grid.spacing();

    std::vector<std::vector<double>> taps(M + 1);
    for (std::size_t j = 1; j <= M; ++j) taps[j] = heat_taps(ds * static_cast<double>(j), h, u0.size());

    std::vector<std::vector<double>> free(M + 1);
    free[0] = u0.values;
    for (std::size_t m = 1; m <= M; ++m) free[m] = convolve(u0.values, taps[m]);

    std::vector<std::vector<double>> u(M + 1, u0.values);
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<std::vector<double>> g(M + 1);
        for (std::size_t k = 0; k <= M; ++k) {
            g[k].resize(u0.size());
            for (std::size_t i = 0; i < u0.size(); ++i) g[k][i] = power_term(u[k][i], p);
        }
        std::vector<std::vector<double>> next(M + 1);
        next[0] = u0.values;
        for (std::size_t m = 1; m <= M; ++m) {
            std::vector<double> acc = free[m];
            for (std::size_t k = 0; k <= m; ++k) {
                const double w = (k == 0 || k == m) ? 0.5 * ds : ds;
                const std::vector<double> term = (k == m) ? g[k] : convolve(g[k], taps[m - k]);
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * term[i];
            }
            next[m] = std::move(acc);
        }
        double diff = 0.0;
        for (std::size_t m = 0; m <= M; ++m)
            for (std::size_t i = 0; i < u0.size(); ++i) diff = std::max(diff, std::abs(next[m][i] - u[m][i]));
        u = std::move(next);
        res.history.push_back(diff);
        res.iterations = it;
        if (!std::isfinite(diff) ||
            (res.history.size() >= 3 && diff > res.history[res.history.size() - 3] && diff > 1.0))
            throw ConvergenceFailure("Duhamel iteration diverged", res.history);
        if (diff < tol) break;
        if (it == max_iter) throw ConvergenceFailure("Duhamel iteration did not converge", res.history);
    }

    for (std::size_t m = 0; m <= M; ++m) {
        res.times.push_back(ds * static_cast<double>(m));
        Field fm(u0.grid, u[m], u0.parity);
        res.max_sup = std::max(res.max_sup, fm.sup_norm());
        res.trajectory.push_back(std::move(fm));
    }
    return res;
}

Field step_imex(const Field& u, double dt, double p) {
    if (!(dt > 0.0)) throw DomainError("step size must be positive");
    const std::size_t n = u.size();
    const double h = u.grid.spacing();
    Field half(u.grid, u.parity);
    for (std::size_t i = 0; i < n; ++i) half.values[i] = reaction_flow(u.values[i], 0.5 * dt, p);
    if (!half.all_finite()) return half;

    // Dirichlet ends: unknowns are the interior nodes.
    const std::size_t m = n - 2;
    Tridiag A(m);
    const double c = 1.0 / (h * h);
    for (std::size_t i = 0; i < m; ++i) {
        A.sub[i] = c;
        A.diag[i] = -2.0 * c;
        A.sup[i] = c;
    }
    std::vector<double> x(half.values.begin() + 1, half.values.end() - 1);
    x = theta_step(A, x, dt, 0.5);

    Field out(u.grid, u.parity);
    for (std::size_t i = 0; i < m; ++i) out.values[i + 1] = reaction_flow(x[i], 0.5 * dt, p);
    out.enforce_parity();
    return out;
}

BlowupEstimate estimate_blowup_time(const SolveTrace& trace, double p, double fit_fraction) {
    BlowupEstimate est;
    est.method = "linear extrapolation of sup^{-(p-1)} over final window";
    const std::size_t n = trace.records.size();
    if (n < 3) return est;
    std::size_t w = std::max<std::size_t>(3, static_cast<std::size_t>(fit_fraction * static_cast<double>(n)));
    w = std::min(w, n);
    std::vector<double> x, y;
    for (std::size_t i = n - w; i < n; ++i) {
        x.push_back(trace.records[i].t);
        y.push_back(std::pow(trace.records[i].sup_norm, -(p - 1.0)));
    }
    const LineFit fit = fit_line(x, y);
    est.t_star = -fit.intercept / fit.slope;
    est.residual = fit.rms_residual;
    est.window = w;
    return est;
}

std::pair<SolveTrace, BlowupEstimate> solve_to_blowup(const HeatProblem& prob, const SolverOptions& opt) {
    const double p = prob.p;
    if (!(p > 1.0)) throw DomainError("exponent p must exceed 1");
    SolveTrace trace{{}, Termination::horizon_reached, prob.u0};
    Field u = prob.u0;
    double t = 0.0;
    trace.records.push_back({0.0, u.sup_norm(), 0.0, energy_E(u, p)});
    std::size_t step = 0;
    for (;;) {
        const double s = u.sup_norm();
        double dt = std::min(opt.dt_max, s > 0.0 ? opt.c_safe * std::pow(s, 1.0 - p) : opt.dt_max);
        const double remaining = prob.horizon - t;
        if (remaining <= 0.0) {
            trace.reason = Termination::horizon_reached;
            break;
        }
        dt = std::min(dt, remaining);
        if (dt < opt.dt_min) {
            trace.reason = Termination::step_underflow;
            break;
        }
        Field next = step_imex(u, dt, p);
        if (!next.all_finite()) {
            trace.reason = Termination::blowup_detected;
            break;
        }
        u = std::move(next);
        t += dt;
        ++step;
        const double sn = u.sup_norm();
        const bool stop = sn > opt.sup_cap || t >= prob.horizon;
        if (step % std::max<std::size_t>(opt.record_every, 1) == 0 || stop)
            trace.records.push_back({t, sn, dt, energy_E(u, p)});
        if (sn > opt.sup_cap) {
            trace.reason = Termination::blowup_detected;
            break;
        }
    }
    trace.final_state = u;
    BlowupEstimate est;
    if (trace.reason != Termination::horizon_reached) est = estimate_blowup_time(trace, p, opt.fit_fraction);
    else est.method = "none (horizon reached)";
    return {std::move(trace), est};
}

double energy_E(const Field& u, double p) {
    const double h = u.grid.spacing();
    const std::size_t n = u.size();
    double grad = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = (u.values[i + 1] - u.values[i]) / h;
        grad += 0.5 * d * d * h;
    }
    Field pot(u.grid);
    for (std::size_t i = 0; i < n; ++i) pot.values[i] = std::pow(std::abs(u.values[i]), p + 1.0) / (p + 1.0);
    return grad - integrate(pot);
}

namespace {
double rho(double y) { return std::exp(-0.25 * y * y); }
}  // namespace

double lyapunov_S(const Field& w, double p) {
    const double h = w.grid.spacing();
    const std::size_t n = w.size();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = (w.values[i + 1] - w.values[i]) / h;
        const double ym = 0.5 * (w.grid.node(i) + w.grid.node(i + 1));
        s += 0.5 * rho(ym) * d * d * h;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double v = w.values[i];
        s += h * rho(w.grid.node(i)) *
             (v * v / (2.0 * (p - 1.0)) - std::pow(std::abs(v), p + 1.0) / (p + 1.0));
    }
    return s;
}

double weighted_I(const Field& w) {
    const double h = w.grid.spacing();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += 0.5 * h * rho(w.grid.node(i)) * w.values[i] * w.values[i];
    return s;
}

double scaled_energy_S_T(const Field& u0, double p, double T) {
    if (!(T > 0.0)) throw DomainError("S_T needs T > 0");
    const double h = u0.grid.spacing();
    const std::size_t n = u0.size();
    auto r = [T](double x) { return std::exp(-x * x / (4.0 * T)); };
    double kin = 0.0, pot = 0.0, mass = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = (u0.values[i + 1] - u0.values[i]) / h;
        kin += 0.5 * d * d * r(0.5 * (u0.grid.node(i) + u0.grid.node(i + 1))) * h;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double v = u0.values[i];
        const double wgt = r(u0.grid.node(i)) * h;
        pot += std::pow(std::abs(v), p + 1.0) / (p + 1.0) * wgt;
        mass += v * v * wgt;
    }
    const double e1 = 0.5 * (p + 3.0) / (p - 1.0);
    const double e2 = -0.5 * (p - 5.0) / (p - 1.0);
    return std::pow(T, e1) * (kin - pot) + 0.5 / (p - 1.0) * std::pow(T, e2) * mass;
}

Field step_w_flow(const Field& w, double ds, double p) {
    if (!(ds > 0.0)) throw DomainError("step size must be positive");
    const std::size_t n = w.size();
    const double h = w.grid.spacing();
    std::vector<double> sub(n, 0.0), dg(n), sup(n, 0.0), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = w.grid.node(i);
        const double ri = rho(y);
        const double rp = i + 1 < n ? rho(y + 0.5 * h) : 0.0;
        const double rm = i > 0 ? rho(y - 0.5 * h) : 0.0;
        const double c = 1.0 / (h * h * ri);
        sub[i] = -c * rm;
        sup[i] = -c * rp;
        dg[i] = 1.0 / ds + 1.0 / (p - 1.0) + c * (rp + rm);
        rhs[i] = w.values[i] / ds + power_term(w.values[i], p);
    }
    Field out(w.grid, solve_tridiagonal(sub, dg, sup, rhs), w.parity);
    out.enforce_parity();
    return out;
}

Field step_rescaled(const Field& v, double dtau, double a, double p) {
    if (!(dtau > 0.0)) throw DomainError("step size must be positive");
    const std::size_t n = v.size();
    const double h = v.grid.spacing();
    const double L = v.grid.half_width();
    const double kappa = 2.0 / (p - 1.0);

    Field half(v.grid, v.parity);
    for (std::size_t i = 0; i < n; ++i) half.values[i] = reaction_flow(v.values[i], 0.5 * dtau, p);
    if (!half.all_finite()) return half;

    Tridiag A(n);
    const double c = 1.0 / (h * h);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double y = v.grid.node(i);
        A.sub[i] = c + a * y / (2.0 * h);
        A.sup[i] = c - a * y / (2.0 * h);
        A.diag[i] = -2.0 * c - a * kappa;
    }
    // Ghost node from y v_y = -kappa v; the drift and decay terms cancel at the end.
    A.diag[0] = A.diag[n - 1] = -2.0 * c - 2.0 * kappa / (h * L);
    A.sup[0] = 2.0 * c;
    A.sub[n - 1] = 2.0 * c;
    auto x = theta_step(A, half.values, dtau, 0.5);

    Field out(v.grid, v.parity);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = reaction_flow(x[i], 0.5 * dtau, p);
    out.enforce_parity();
    return out;
}

}  // namespace blowup

#include "blowup/parameter_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blowup/error.hpp"
#include "blowup/numerics.hpp"

namespace blowup {

double BetaLaw::operator()(double tau) const {
    if (tau < 0.0) throw DomainError("beta needs tau >= 0");
    return 1.0 / (1.0 / b0 + inverse_slope() * tau);
}

double BetaLaw::kappa() const { return std::min(0.5, 0.5 * (p - 1.0)); }

double beta(double tau, const BetaLaw& law) { return law(tau); }

std::array<double, 2> truncated_rhs(double tau, double b, double c, const TruncatedOptions& opt) {
    const double q = opt.p - 1.0;
    const double a = opt.l * c + (1.0 - opt.l) * opt.s;
    double bt = -2.0 * (3.0 * opt.p - 1.0) * b * b / (q * q) + 2.0 * (c - a) * b;
    double ct = 2.0 * c * (c - a) - 2.0 * b * c / q;
    if (opt.R_b) bt += opt.R_b(tau, b, c);
    if (opt.R_c) ct += c * opt.R_c(tau, b, c);
    return {bt, ct};
}

namespace {

using State2 = std::array<double, 2>;

State2 rk4(double tau, const State2& y, double h, const TruncatedOptions& opt) {
    auto f = [&](double t, const State2& s) { return truncated_rhs(t, s[0], s[1], opt); };
    const State2 k1 = f(tau, y);
    const State2 k2 = f(tau + 0.5 * h, {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
    const State2 k3 = f(tau + 0.5 * h, {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
    const State2 k4 = f(tau + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
    return {y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

}  // namespace

TruncatedTrajectory integrate_truncated(const TruncatedState& initial, double tau_end,
                                        const TruncatedOptions& opt) {
    if (initial.b < 0.0) throw DomainError("truncated system needs b(0) >= 0");
    if (opt.l <= 1.0) throw DomainError("truncated system needs l > 1");
    if (tau_end < initial.tau) throw DomainError("tau_end precedes the initial time");
    TruncatedTrajectory out;
    std::vector<double> samples = opt.sample_times;
    std::sort(samples.begin(), samples.end());
    std::size_t next = 0;
    while (next < samples.size() && samples[next] < initial.tau) ++next;
    const bool every_step = samples.empty();

    double tau = initial.tau;
    State2 y{initial.b, initial.c};
    auto emit = [&](double t, const State2& s) { out.states.push_back({t, s[0], s[1]}); };
    if (every_step || (next < samples.size() && samples[next] == tau)) {
        emit(tau, y);
        if (!every_step) ++next;
    }
    double h = std::min(opt.dt_init, opt.dt_max);
    while (tau < tau_end) {
        double stop = tau_end;
        if (!every_step && next < samples.size()) stop = std::min(stop, samples[next]);
        const bool clipped = tau + h >= stop;
        const double step = clipped ? stop - tau : h;
        const State2 full = rk4(tau, y, step, opt);
        const State2 half = rk4(tau, y, 0.5 * step, opt);
        const State2 two = rk4(tau + 0.5 * step, half, 0.5 * step, opt);
        const double err = std::max(std::abs(two[0] - full[0]), std::abs(two[1] - full[1])) / 15.0;
        if (!std::isfinite(err)) throw ConvergenceFailure("truncated integrator produced a non-finite state");
        if (err > opt.tol && step > 1e-14) {
            ++out.rejected_steps;
            h = step * std::max(0.1, 0.9 * std::pow(opt.tol / err, 0.2));
            continue;
        }
        ++out.accepted_steps;
        // Local extrapolation: the doubled solution plus its error estimate.
        y = {two[0] + (two[0] - full[0]) / 15.0, two[1] + (two[1] - full[1]) / 15.0};
        tau = clipped ? stop : tau + step;
        const double grow = err > 0.0 ? 0.9 * std::pow(opt.tol / err, 0.2) : 4.0;
        if (!clipped) h = std::min(opt.dt_max, step * std::clamp(grow, 0.1, 4.0));
        if (y[0] < 0.0) {
            out.left_region = true;
            emit(tau, y);
            break;
        }
        if (every_step) {
            emit(tau, y);
        } else if (next < samples.size() && tau == samples[next]) {
            emit(tau, y);
            ++next;
        }
    }
    return out;
}

EquilibriumJacobian jacobian_at_equilibrium(double l, double p) {
    if (l <= 1.0) throw DomainError("jacobian needs l > 1");
    const double b = 0.0, c = 0.5, s = 0.5;
    const double q = p - 1.0;
    const double a = l * c + (1.0 - l) * s;
    EquilibriumJacobian r;
    r.J[0][0] = -4.0 * (3.0 * p - 1.0) * b / (q * q) + 2.0 * (c - a);
    r.J[0][1] = 2.0 * b * (1.0 - l);
    r.J[1][0] = -2.0 * c / q;
    r.J[1][1] = 2.0 * (c - a) + 2.0 * c * (1.0 - l) - 2.0 * b / q;
    const double tr = r.J[0][0] + r.J[1][1];
    const double det = r.J[0][0] * r.J[1][1] - r.J[0][1] * r.J[1][0];
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    r.eigenvalues = {0.5 * tr - disc, 0.5 * tr + disc};
    return r;
}

AsymptoticPrediction asymptotic_laws(double t, double t_star, double p, double lambda0) {
    const double theta = t_star - t;
    if (!(theta > 0.0)) throw DomainError("asymptotic laws need t < t*");
    if (!(theta < 1.0)) throw DomainError("asymptotic laws need t* - t < 1");
    const double L = std::abs(std::log(theta));
    const double q = p - 1.0;
    return {lambda0 / std::sqrt(theta), q * q / (4.0 * p * L), 0.5 - q / (4.0 * p * L)};
}

namespace {

LawFit make_fit(std::string name, double target, std::span<const double> x, std::span<const double> y,
                double lo, double hi) {
    if (x.size() < 3) throw DomainError("fit '" + name + "' has fewer than 3 samples in its window");
    const LineFit f = fit_line(x, y);
    LawFit r;
    r.name = std::move(name);
    r.target = target;
    r.fitted = f.slope;
    r.rel_error = std::abs(f.slope - target) / std::abs(target);
    r.rms_residual = f.rms_residual;
    r.window_lo = lo;
    r.window_hi = hi;
    r.count = f.count;
    return r;
}

}  // namespace

LawFitReport fit_blowup_laws(const LawFitInput& in) {
    const std::size_t n = in.tau.size();
    if (in.b.size() != n || in.lambda.size() != n || in.theta.size() != n)
        throw DomainError("law fit inputs must be aligned");
    const double q = in.p - 1.0;
    std::vector<double> t1, ib, lt, ll, il, bb;
    double th_lo = std::numeric_limits<double>::infinity(), th_hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (in.tau[i] < in.tau_lo || in.tau[i] > in.tau_hi) continue;
        if (!(in.b[i] > 0.0)) continue;
        t1.push_back(in.tau[i]);
        ib.push_back(1.0 / in.b[i]);
        const double th = in.theta[i];
        if (th > 0.0 && th < 1.0 && in.lambda[i] > 0.0) {
            lt.push_back(std::log(th));
            ll.push_back(std::log(in.lambda[i]));
            il.push_back(1.0 / std::abs(std::log(th)));
            bb.push_back(in.b[i]);
            th_lo = std::min(th_lo, th);
            th_hi = std::max(th_hi, th);
        }
    }
    LawFitReport r;
    r.inv_b_slope = make_fit("inv_b_slope", 4.0 * in.p / (q * q), t1, ib, in.tau_lo, in.tau_hi);
    r.lambda_exponent = make_fit("lambda_exponent", -0.5, lt, ll, th_lo, th_hi);
    r.b_log_coefficient = make_fit("b_log_coefficient", q * q / (4.0 * in.p), il, bb, th_lo, th_hi);
    return r;
}

LawFit fit_inverse_b_slope(std::span<const TruncatedState> states, double p, double lo, double hi) {
    std::vector<double> x, y;
    for (const auto& s : states) {
        if (s.tau < lo || s.tau > hi || !(s.b > 0.0)) continue;
        x.push_back(s.tau);
        y.push_back(1.0 / s.b);
    }
    const double q = p - 1.0;
    return make_fit("inv_b_slope", 4.0 * p / (q * q), x, y, lo, hi);
}

double truncated_gauge_ratio(std::span<const TruncatedState> states, const TruncatedOptions& opt,
                             double tau_min) {
    if (states.empty()) return 0.0;
    const BetaLaw law{states.front().b, opt.p};
    double r = 0.0;
    for (const auto& s : states) {
        if (s.tau < tau_min) continue;
        const double a = opt.l * s.c + (1.0 - opt.l) * opt.s;
        const double be = law(s.tau - states.front().tau);
        r = std::max(r, std::abs(a - 0.5 + 2.0 * s.b / (opt.p - 1.0)) / (be * be));
    }
    return r;
}

double limit_profile(double y, double p) {
    const double q = p - 1.0;
    return std::pow(q * (1.0 + q * y * y / (4.0 * p)), -1.0 / q);
}

ProfileLimitReport profile_limit_check(std::span<const ProfileSnapshot> snaps, double p, double R,
                                       std::size_t y_samples) {
    if (y_samples < 2) y_samples = 2;
    ProfileLimitReport rep;
    rep.R = R;
    const double q = p - 1.0;
    for (const auto& s : snaps) {
        if (!(s.theta > 0.0 && s.theta < 1.0)) throw DomainError("profile check needs 0 < t* - t < 1");
        const double scale = std::sqrt(s.theta * std::abs(std::log(s.theta)));
        const double amp = std::pow(s.theta, 1.0 / q) * std::pow(s.lambda, 2.0 / q);
        if (s.lambda * scale * R > s.v.grid.half_width())
            throw DomainError("profile check: |y| <= R maps outside the grid");
        double sup = 0.0;
        for (std::size_t k = 0; k < y_samples; ++k) {
            const double y = y_samples == 1 ? 0.0 : -R + 2.0 * R * static_cast<double>(k) / static_cast<double>(y_samples - 1);
            const double dp = amp * interpolate(s.v, s.lambda * scale * y) - limit_profile(y, p);
            const double dm = amp * interpolate(s.v, -s.lambda * scale * y) - limit_profile(-y, p);
            sup = std::max(sup, std::abs(dp));
            rep.parity_defect = std::max(rep.parity_defect, std::abs(dp - dm));
        }
        rep.theta.push_back(s.theta);
        rep.deviation.push_back(sup);
    }
    if (rep.theta.size() >= 2) {
        const double th_min = *std::min_element(rep.theta.begin(), rep.theta.end());
        std::vector<std::pair<double, double>> tail;
        for (std::size_t i = 0; i < rep.theta.size(); ++i)
            if (rep.theta[i] <= 10.0 * th_min) tail.emplace_back(rep.theta[i], rep.deviation[i]);
        std::sort(tail.begin(), tail.end(), [](auto& x, auto& y) { return x.first > y.first; });
        rep.decreasing = tail.size() >= 2;
        for (std::size_t i = 1; i < tail.size(); ++i)
            if (tail[i].second > tail[i - 1].second * (1.0 + 1e-3)) rep.decreasing = false;
    }
    return rep;
}

}  // namespace blowup

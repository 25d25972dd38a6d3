#include "blowup/frames.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blowup/error.hpp"

namespace blowup {

MonotoneSpline::MonotoneSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw DomainError("spline needs >= 2 paired samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw DomainError("spline abscissae must be strictly increasing");
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    m_.assign(n, 0.0);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) {
            m_[i] = 0.0;
        } else {
            const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
            m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
}

std::size_t MonotoneSpline::segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double MonotoneSpline::operator()(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double MonotoneSpline::derivative(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
    const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
    return (d00 * y_[i] + d01 * y_[i + 1]) / h + d10 * m_[i] + d11 * m_[i + 1];
}

double MonotoneSpline::inverse(double y) const {
    auto it = std::upper_bound(y_.begin(), y_.end(), y);
    std::size_t i = it == y_.begin() ? 0 : static_cast<std::size_t>(it - y_.begin()) - 1;
    i = std::min(i, y_.size() - 2);
    double lo = x_[i], hi = x_[i + 1];
    if (y <= y_.front()) lo = hi = x_.front();
    if (y >= y_.back()) lo = hi = x_.back();
    double x = 0.5 * (lo + hi);
    for (int it2 = 0; it2 < 200 && hi - lo > 0.0; ++it2) {
        const double f = (*this)(x) - y;
        if (f == 0.0) break;
        if (f > 0.0) hi = x; else lo = x;
        const double df = derivative(x);
        double nx = df > 0.0 ? x - f / df : 0.5 * (lo + hi);
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        if (std::abs(nx - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
            x = nx;
            break;
        }
        x = nx;
    }
    return x;
}

BlowupFrame BlowupFrame::from_samples(std::vector<double> t, std::vector<double> lambda,
                                      std::vector<double> a, std::vector<double> tau) {
    BlowupFrame f;
    f.t_ = std::move(t);
    f.l_ = std::move(lambda);
    f.a_ = std::move(a);
    f.tau_s_ = std::move(tau);
    f.build();
    return f;
}

void BlowupFrame::build() {
    for (double l : l_)
        if (!(l > 0.0)) throw DomainError("lambda must stay positive");
    lambda_ = MonotoneSpline(t_, l_);
    tau_ = MonotoneSpline(t_, tau_s_);
    a_tau_ = MonotoneSpline(tau_s_, a_);
}

BlowupFrame BlowupFrame::from_a_of_t(const std::function<double(double)>& a_of_t, double t_end,
                                     std::size_t steps, double lambda0) {
    std::vector<double> t{0.0}, l{lambda0}, a{a_of_t(0.0)}, tau{0.0};
    const double dt = t_end / static_cast<double>(steps);
    double lam = lambda0, ta = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t0 = dt * static_cast<double>(k);
        auto f = [&](double tt, double L) { return a_of_t(tt) * L * L * L; };
        const double k1 = f(t0, lam), q1 = lam * lam;
        const double l2 = lam + 0.5 * dt * k1;
        const double k2 = f(t0 + 0.5 * dt, l2), q2 = l2 * l2;
        const double l3 = lam + 0.5 * dt * k2;
        const double k3 = f(t0 + 0.5 * dt, l3), q3 = l3 * l3;
        const double l4 = lam + dt * k3;
        const double k4 = f(t0 + dt, l4), q4 = l4 * l4;
        lam += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        ta += dt / 6.0 * (q1 + 2 * q2 + 2 * q3 + q4);
        t.push_back(t0 + dt);
        l.push_back(lam);
        a.push_back(a_of_t(t0 + dt));
        tau.push_back(ta);
    }
    return from_samples(std::move(t), std::move(l), std::move(a), std::move(tau));
}

BlowupFrame BlowupFrame::from_a_history(std::span<const double> tau, std::span<const double> a,
                                        double lambda0) {
    if (tau.size() != a.size() || tau.size() < 2) throw DomainError("need paired tau/a samples");
    std::vector<double> tv{0.0}, l{lambda0}, av{a[0]}, tauv{tau[0]};
    double lam = lambda0, t = 0.0;
    for (std::size_t k = 0; k + 1 < tau.size(); ++k) {
        const double h = tau[k + 1] - tau[k];
        const double a0 = a[k], a1 = a[k + 1], am = 0.5 * (a0 + a1);
        // state (lambda, t): lambda' = a lambda, t' = lambda^{-2}
        const double k1 = a0 * lam, q1 = 1.0 / (lam * lam);
        const double l2 = lam + 0.5 * h * k1;
        const double k2 = am * l2, q2 = 1.0 / (l2 * l2);
        const double l3 = lam + 0.5 * h * k2;
        const double k3 = am * l3, q3 = 1.0 / (l3 * l3);
        const double l4 = lam + h * k3;
        const double k4 = a1 * l4, q4 = 1.0 / (l4 * l4);
        lam += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h / 6.0 * (q1 + 2 * q2 + 2 * q3 + q4);
        tv.push_back(t);
        l.push_back(lam);
        av.push_back(a1);
        tauv.push_back(tau[k + 1]);
    }
    return from_samples(std::move(tv), std::move(l), std::move(av), std::move(tauv));
}

double BlowupFrame::a_consistency_error() const {
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < t_.size(); ++k) {
        const double h0 = t_[k] - t_[k - 1], h1 = t_[k + 1] - t_[k];
        const double dl = (-h1 / (h0 * (h0 + h1))) * l_[k - 1] + ((h1 - h0) / (h0 * h1)) * l_[k] +
                          (h0 / (h1 * (h0 + h1))) * l_[k + 1];
        const double est = dl / (l_[k] * l_[k] * l_[k]);
        worst = std::max(worst, std::abs(est - a_[k]) / std::max(std::abs(a_[k]), 1e-300));
    }
    return worst;
}

double BlowupFrame::lambda_reconstruction_error() const {
    double integral = 0.0, worst = 0.0;
    const double base = 1.0 / (l_[0] * l_[0]);
    for (std::size_t k = 1; k < t_.size(); ++k) {
        integral += 0.5 * (a_[k] + a_[k - 1]) * (t_[k] - t_[k - 1]);
        const double rec = std::pow(base - 2.0 * integral, -0.5);
        worst = std::max(worst, std::abs(rec - l_[k]) / l_[k]);
    }
    return worst;
}

Resampled to_similarity(const Field& u, double lambda, double p, const Grid& y_grid) {
    Resampled r{Field(y_grid, u.parity), 1.0};
    const double scale = std::pow(lambda, -2.0 / (p - 1.0));
    std::size_t covered = 0;
    for (std::size_t j = 0; j < y_grid.size(); ++j) {
        const double x = y_grid.node(j) / lambda;
        if (std::abs(x) <= u.grid.half_width()) ++covered;
        r.field.values[j] = scale * interpolate(u, x);
    }
    r.coverage = static_cast<double>(covered) / static_cast<double>(y_grid.size());
    return r;
}

Resampled to_similarity(const Field& u, const BlowupFrame& frame, double t, double p, const Grid& y_grid) {
    return to_similarity(u, frame.lambda_at(t), p, y_grid);
}

Resampled from_similarity(const Field& v, double lambda, double p, const Grid& x_grid) {
    Resampled r{Field(x_grid, v.parity), 1.0};
    const double scale = std::pow(lambda, 2.0 / (p - 1.0));
    std::size_t covered = 0;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double y = lambda * x_grid.node(i);
        if (std::abs(y) <= v.grid.half_width()) ++covered;
        r.field.values[i] = scale * interpolate(v, y);
    }
    r.coverage = static_cast<double>(covered) / static_cast<double>(x_grid.size());
    return r;
}

Field gauge(const Field& v, double a) {
    Field w = v;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double y = w.grid.node(i);
        w.values[i] *= std::exp(-0.25 * a * y * y);
    }
    return w;
}

Field ungauge(const Field& w, double a, std::vector<std::size_t>* overflow) {
    Field v = w;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double y = v.grid.node(i);
        const double f = std::exp(0.25 * a * y * y);
        if (!std::isfinite(f)) {
            v.values[i] = std::numeric_limits<double>::quiet_NaN();
            if (overflow) overflow->push_back(i);
            continue;
        }
        v.values[i] *= f;
    }
    return v;
}

double RescaledFrame::lambda1(double t) const {
    const double arg = 1.0 / (lambda_T * lambda_T) - 2.0 * alpha * (t - t_T);
    if (!(arg > 0.0)) throw DomainError("lambda_1 undefined: root argument <= 0");
    return 1.0 / std::sqrt(arg);
}

double RescaledFrame::dlambda1_dt(double t) const {
    const double l = lambda1(t);
    return alpha * l * l * l;
}

double RescaledFrame::sigma(double t) const {
    const double A = 1.0 / (lambda_T * lambda_T);
    if (alpha == 0.0) return t / A;
    const double at0 = A + 2.0 * alpha * t_T;
    const double att = A - 2.0 * alpha * (t - t_T);
    if (!(at0 > 0.0 && att > 0.0)) throw DomainError("lambda_1 undefined on [0, t]");
    return std::log(at0 / att) / (2.0 * alpha);
}

RescaledFrame build_lambda1(const BlowupFrame& frame, double T) {
    RescaledFrame r;
    r.T = T;
    r.alpha = frame.a_at_tau(T);
    r.t_T = frame.t_of_tau(T);
    r.lambda_T = frame.lambda_at(r.t_T);
    if (!(1.0 / (r.lambda_T * r.lambda_T) + 2.0 * r.alpha * r.t_T > 0.0))
        throw DomainError("lambda_1 undefined inside the window");
    return r;
}

Resampled xi_to_eta(const Field& xi, const BlowupFrame& frame, const RescaledFrame& rframe,
                    double tau, double p, const Grid& z_grid) {
    const double t = frame.t_of_tau(tau);
    const double lam = frame.lambda_at(t);
    const double a = frame.a_at_tau(tau);
    const double ratio = lam / rframe.lambda1(t);
    const double pref = std::pow(ratio, 2.0 / (p - 1.0));
    Resampled r{Field(z_grid, xi.parity), 1.0};
    std::size_t covered = 0;
    for (std::size_t j = 0; j < z_grid.size(); ++j) {
        const double z = z_grid.node(j);
        const double y = ratio * z;
        if (std::abs(y) <= xi.grid.half_width()) ++covered;
        const double val = interpolate(xi, y);
        r.field.values[j] = val == 0.0 ? 0.0 : pref * std::exp(0.25 * a * y * y - 0.25 * rframe.alpha * z * z) * val;
    }
    r.coverage = static_cast<double>(covered) / static_cast<double>(z_grid.size());
    return r;
}

}  // namespace blowup

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "blowup/grid.hpp"

namespace blowup {

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).
class MonotoneSpline {
public:
    MonotoneSpline() = default;
    MonotoneSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;
    double derivative(double x) const;
    /// Solves s(x) = y for strictly increasing data.
    double inverse(double y) const;
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }

private:
    std::size_t segment(double x) const;
    std::vector<double> x_, y_, m_;
};

/// Similarity frame: lambda(t), a = lambda^{-3} lambda_t, tau(t) = int_0^t lambda^2.
class BlowupFrame {
public:
    /// Integrates lambda_t = a(t) lambda^3, tau_t = lambda^2 with RK4.
    static BlowupFrame from_a_of_t(const std::function<double(double)>& a_of_t, double t_end,
                                   std::size_t steps, double lambda0 = 1.0);
    /// Integrates lambda_tau = a lambda, t_tau = lambda^{-2} with RK4, a linear between samples.
    static BlowupFrame from_a_history(std::span<const double> tau, std::span<const double> a,
                                      double lambda0 = 1.0);
    /// Takes the samples as given; t must be strictly increasing.
    static BlowupFrame from_samples(std::vector<double> t, std::vector<double> lambda,
                                    std::vector<double> a, std::vector<double> tau);

    double lambda_at(double t) const { return lambda_(t); }
    double tau_of_t(double t) const { return tau_(t); }
    double t_of_tau(double tau) const { return tau_.inverse(tau); }
    double a_at_tau(double tau) const { return a_tau_(tau); }

    const std::vector<double>& t() const { return t_; }
    const std::vector<double>& lambda() const { return l_; }
    const std::vector<double>& a() const { return a_; }
    const std::vector<double>& tau() const { return tau_s_; }

    /// Max relative gap between a and lambda^{-3} lambda_t (centered differences, interior samples).
    double a_consistency_error() const;
    /// Max relative gap between lambda and [lambda0^{-2} - 2 int_0^t a]^{-1/2}.
    double lambda_reconstruction_error() const;

private:
    void build();
    std::vector<double> t_, l_, a_, tau_s_;
    MonotoneSpline lambda_, tau_, a_tau_;
};

struct Resampled {
    Field field;
    double coverage = 1.0;  // fraction of target nodes whose source point lies on the grid
};

/// v(y) = lambda^{-2/(p-1)} u(y / lambda) on `y_grid`.
Resampled to_similarity(const Field& u, double lambda, double p, const Grid& y_grid);
Resampled to_similarity(const Field& u, const BlowupFrame& frame, double t, double p, const Grid& y_grid);
/// u(x) = lambda^{2/(p-1)} v(lambda x) on `x_grid`.
Resampled from_similarity(const Field& v, double lambda, double p, const Grid& x_grid);

/// w = e^{-a y^2/4} v.
Field gauge(const Field& v, double a);
/// v = e^{a y^2/4} w; nodes where the factor overflows are set to NaN and listed.
Field ungauge(const Field& w, double a, std::vector<std::size_t>* overflow = nullptr);

/// lambda_1(t) = (lambda(t_T)^{-2} - 2 alpha (t - t_T))^{-1/2}, alpha = a(T).
struct RescaledFrame {
    double alpha = 0.0;
    double T = 0.0;         // matching value of tau
    double t_T = 0.0;       // t(T)
    double lambda_T = 1.0;  // lambda(t_T)

    double lambda1(double t) const;
    double dlambda1_dt(double t) const;
    /// sigma(t) = int_0^t lambda_1^2, in closed form.
    double sigma(double t) const;
};

RescaledFrame build_lambda1(const BlowupFrame& frame, double T);

/// eta(z) = (lambda/lambda_1)^{2/(p-1)} e^{a y^2/4 - alpha z^2/4} xi(y), y = (lambda/lambda_1) z.
Resampled xi_to_eta(const Field& xi, const BlowupFrame& frame, const RescaledFrame& rframe,
                    double tau, double p, const Grid& z_grid);

}  // namespace blowup

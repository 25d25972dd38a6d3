#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "blowup/grid.hpp"

namespace blowup {

/// beta(tau) = 1/(1/b0 + 4p tau/(p-1)^2), the law b(tau) shadows.
struct BetaLaw {
    double b0 = 0.05;
    double p = 3.0;

    double operator()(double tau) const;
    /// d(1/beta)/dtau = 4p/(p-1)^2.
    double inverse_slope() const { return 4.0 * p / ((p - 1.0) * (p - 1.0)); }
    double kappa() const;
};

double beta(double tau, const BetaLaw& law);

struct TruncatedState {
    double tau = 0.0;
    double b = 0.0;
    double c = 0.5;
};

/// Extra terms added to the right-hand sides: b_tau += R_b, c_tau += c R_c.
using RemainderFn = std::function<double(double tau, double b, double c)>;

struct TruncatedOptions {
    double l = 2.0;
    double p = 3.0;
    /// Gauge offset: a = l c + (1 - l) s. The usual gauge has s = 1/2.
    double s = 0.5;
    double tol = 1e-10;
    double dt_init = 1e-3;
    double dt_max = 0.5;
    RemainderFn R_b;
    RemainderFn R_c;
    /// If non-empty, states are reported exactly at these times (sorted, within range).
    std::vector<double> sample_times;
};

struct TruncatedTrajectory {
    std::vector<TruncatedState> states;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    /// Set when b went negative; integration stops there.
    bool left_region = false;
};

/// Right-hand side (b_tau, c_tau) of the truncated system.
std::array<double, 2> truncated_rhs(double tau, double b, double c, const TruncatedOptions& opt);

/// Adaptive RK4 (step doubling, local error <= tol) from `initial` to tau_end.
TruncatedTrajectory integrate_truncated(const TruncatedState& initial, double tau_end,
                                        const TruncatedOptions& opt = {});

struct EquilibriumJacobian {
    std::array<std::array<double, 2>, 2> J{};  // rows (b_tau, c_tau), columns (b, c)
    std::array<double, 2> eigenvalues{};       // ascending
};

/// Linearisation at (b, c) = (0, 1/2) with s = 1/2.
EquilibriumJacobian jacobian_at_equilibrium(double l, double p);

struct AsymptoticPrediction {
    double lambda = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Leading-order laws lambda = lambda0 (t*-t)^{-1/2}, b = (p-1)^2/(4p|ln(t*-t)|),
/// c = 1/2 - (p-1)/(4p|ln(t*-t)|). Needs 0 < t* - t < 1.
AsymptoticPrediction asymptotic_laws(double t, double t_star, double p, double lambda0 = 1.0);

struct LawFit {
    std::string name;
    double target = 0.0;
    double fitted = 0.0;
    double rel_error = 0.0;
    double rms_residual = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::size_t count = 0;
};

/// Parameter history of a run; theta[i] = t* - t at sample i.
struct LawFitInput {
    double p = 3.0;
    std::vector<double> tau, b, lambda, theta;
    double tau_lo = 5.0;
    double tau_hi = 50.0;
};

struct LawFitReport {
    LawFit inv_b_slope;       // d(1/b)/dtau, target 4p/(p-1)^2
    LawFit lambda_exponent;   // d ln(lambda)/d ln(t*-t), target -1/2
    LawFit b_log_coefficient; // b against 1/|ln(t*-t)|, target (p-1)^2/(4p)
};

/// Least-squares fits on tau in [tau_lo, tau_hi]. Throws DomainError with fewer than 3 samples.
LawFitReport fit_blowup_laws(const LawFitInput& in);

/// Slope of 1/b against tau over [lo, hi] for a truncated trajectory.
LawFit fit_inverse_b_slope(std::span<const TruncatedState> states, double p, double lo, double hi);

/// max over the trajectory (tau >= tau_min) of |a - 1/2 + 2b/(p-1)| / beta^2.
double truncated_gauge_ratio(std::span<const TruncatedState> states, const TruncatedOptions& opt,
                             double tau_min = 0.0);

/// Snapshot u(x, t) = lambda^{2/(p-1)} v(lambda x) at theta = t* - t.
struct ProfileSnapshot {
    double theta = 0.0;
    double lambda = 1.0;
    Field v;
};

struct ProfileLimitReport {
    double R = 0.0;
    std::vector<double> theta;
    std::vector<double> deviation;  // sup over |y| <= R
    double parity_defect = 0.0;     // largest |d(y) - d(-y)|
    bool decreasing = false;        // over the last decade of theta
};

/// (p-1)^{-1/(p-1)} (1 + (p-1) y^2/(4p))^{-1/(p-1)}.
double limit_profile(double y, double p);

/// Deviation of theta^{1/(p-1)} u(y (theta |ln theta|)^{1/2}) from the limit profile.
/// Throws DomainError if a sample point falls outside the grid image.
ProfileLimitReport profile_limit_check(std::span<const ProfileSnapshot> snaps, double p, double R,
                                       std::size_t y_samples = 201);

}  // namespace blowup

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "blowup/grid.hpp"
#include "blowup/profiles.hpp"

namespace blowup {

struct SplitOptions {
    int max_iter = 50;
    double tol = 1e-12;
    /// Above this 2x2 condition number Newton falls back to damped least squares.
    double cond_limit = 1e8;
    double l = 2.0;
    double a_min = 0.25;
    double a_max = 1.0;
};

struct SplitResult {
    ProfileParams params;
    Field xi;          // e^{-a y^2/4} (v - V_ab)
    Field deviation;   // v - V_ab, the same fluctuation without the Gaussian factor
    double ortho0 = 0.0;  // <xi, phi_0a>
    double ortho2 = 0.0;  // <xi, phi_2a>
    int iterations = 0;
    bool damped = false;
    bool in_window = true;  // a within [a_min, a_max]
};

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

/// G(mu, v) = (<V_mu - v, e^{-a y^2/4} phi_0a>, <V_mu - v, e^{-a y^2/4} phi_2a>), mu = (a, b).
Vec2 split_residual(const Field& v, double p, double a, double b, double l = 2.0);

/// Analytic dG/dmu = A1 + A2; A2 collects the derivative of the weights in a.
Mat2 split_jacobian(const Field& v, double p, double a, double b, double l = 2.0);

/// Newton solve of G(mu, v) = 0 from (a0, b0). Throws ConvergenceFailure after
/// max_iter iterations and NeighborhoodExit if b is driven to b <= 0.
SplitResult solve_g(const Field& v, double p, double a0, double b0, const SplitOptions& opt = {});

/// beta(tau) = 1 / (1/b(0) + 4 p tau/(p-1)^2); kappa = min(1/2, (p-1)/2).
double beta_of_tau(double tau, double b_initial, double p);
double kappa_of_p(double p);

/// Per-sample summary of a split, enough to rebuild the majorants for any C_D in `cutoffs`.
struct SplitSample {
    double tau = 0.0;
    double a = 0.0, b = 0.0, c = 0.0;
    double dev_weighted = 0.0;      // ||<y>^{-3} (v - V)||_inf
    std::vector<double> tail_sup;   // ||chi_{|y| >= C_D/sqrt(beta)} (v - V)||_inf per cutoff
    std::vector<double> tail_covered;  // 1 if C_D/sqrt(beta) < L, else 0
    double ortho0 = 0.0, ortho2 = 0.0;
    int iterations = 0;
};

SplitSample summarize_split(const SplitResult& s, double tau, double p, double b_initial,
                            std::span<const double> cutoffs);

struct MajorantSeries {
    double C_D = 5.0;
    double kappa = 0.5;
    std::vector<double> tau, beta, D;
    std::vector<double> M1, M2, A, B;              // running maxima
    std::vector<double> M1_inst, M2_inst, A_inst, B_inst;
    double cutoff_coverage = 0.0;  // fraction of samples with D < L
};

/// M1 = max beta^{-2} ||<y>^{-3} e^{a y^2/4} xi||, M2 = max ||e^{a y^2/4} chi_{>=D} xi||,
/// A = max beta^{-2} |a - 1/2 + 2b/(p-1)|, B = max beta^{-(1+kappa)} |b - beta|.
MajorantSeries compute_majorants(std::span<const SplitSample> history, double p, double b_initial,
                                 std::size_t cutoff_index, double C_D);

struct EffectiveRHS {
    std::vector<double> tau, b_tau, c_tau, a_tau;
    std::vector<double> Gamma0, Gamma1, R_b, R_c;
};

/// Gamma_0, Gamma_1 and the remainders R_b, R_c from a uniformly sampled parameter history.
/// Derivatives use the 5-point smoothed difference; a_tau = l c_tau.
EffectiveRHS compute_gammas(std::span<const double> tau, std::span<const double> a,
                            std::span<const double> b, std::span<const double> c, double p, double l = 2.0);

double gamma0(double a, double b, double c, double c_tau, double p);
double gamma1(double a, double b, double c, double b_tau, double p);
double remainder_b(double a, double b, double c, double b_tau, double p);
double remainder_c(double a, double b, double c, double c_tau, double p);

/// F = (1/(p-1)) [Gamma0 + Gamma1 (p-1) a y^2/(p-1+b y^2) - 4p b^3 y^4/((p-1)^2 (p-1+b y^2)^2)] v_abc.
Field evaluate_F(const ProfileParams& pp, double Gamma0, double Gamma1, double p, const Grid& g);

/// N = [|xi+v_abc|^{p-1}(xi+v_abc) - v_abc^p - p v_abc^{p-1} xi] e^{a(p-1) y^2/4}.
Field evaluate_N(const Field& xi, const ProfileParams& pp, double p);

/// Smallest C with |N| <= C (e^{a y^2/4} xi^2 + e^{(p-1) a y^2/4} |xi|^p) at every node.
double nonlinearity_constant(const Field& xi, const ProfileParams& pp, double p);

}  // namespace blowup

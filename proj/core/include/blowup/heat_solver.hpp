#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "blowup/grid.hpp"

namespace blowup {

/// u_t = u_xx + |u|^{p-1} u on [-L, L] with u = 0 at the ends.
struct HeatProblem {
    double p = 3.0;
    Field u0;
    double horizon = std::numeric_limits<double>::infinity();
};

enum class Termination { horizon_reached, blowup_detected, step_underflow };
std::string to_string(Termination t);

struct TraceRecord {
    double t = 0.0;
    double sup_norm = 0.0;
    double dt = 0.0;
    double energy_E = 0.0;
    double lyapunov_S = std::numeric_limits<double>::quiet_NaN();
};

struct SolveTrace {
    std::vector<TraceRecord> records;
    Termination reason = Termination::horizon_reached;
    Field final_state;
};

struct BlowupEstimate {
    double t_star = std::numeric_limits<double>::quiet_NaN();
    std::string method;
    double residual = std::numeric_limits<double>::quiet_NaN();
    std::size_t window = 0;
};

struct SolverOptions {
    double dt_max = 1e-3;
    double c_safe = 0.01;
    double sup_cap = 1e6;
    double dt_min = 1e-14;
    /// Fraction of the final records used for the t* extrapolation.
    double fit_fraction = 0.25;
    /// Keep every k-th record (the last one is always kept).
    std::size_t record_every = 1;
};

/// Convolution with (4 pi t)^{-1/2} exp(-(x-y)^2 / (4t)); zero extension beyond the grid.
/// Columns are normalised to unit discrete mass so that constants and mass are preserved
/// even when sqrt(t) is below the grid spacing.
Field heat_semigroup_apply(const Field& f, double t);

/// T = (1/2) min[((2p)^p ||u0||^{p-1})^{-1}, 1].
double local_existence_time(double p, double u0_sup);
/// max[2^{1/p} p ||u0||, 2^{1/p} ||u0||^{1/p}].
double local_apriori_bound(double p, double u0_sup);

struct DuhamelResult {
    std::vector<double> times;
    std::vector<Field> trajectory;
    double T_local = 0.0;
    double apriori_bound = 0.0;
    double max_sup = 0.0;
    int iterations = 0;
    std::vector<double> history;  // sup-norm difference between successive iterates
};

/// Picard iteration of u -> e^{t Delta} u0 + int_0^t e^{(t-s) Delta} |u|^{p-1} u ds on a
/// uniform time slab, trapezoid in s. `slab` <= 0 means the full T_local.
DuhamelResult duhamel_local_solve(const HeatProblem& prob, std::size_t time_slices = 64,
                                  double slab = 0.0, double tol = 1e-10, int max_iter = 200);

/// Strang step: exact reaction for dt/2, Crank-Nicolson diffusion for dt, reaction dt/2.
/// A non-finite entry in the result means the reaction flow blew up within the step.
Field step_imex(const Field& u, double dt, double p);

/// Adaptive IMEX run until the sup norm exceeds the cap, dt underflows or the horizon.
std::pair<SolveTrace, BlowupEstimate> solve_to_blowup(const HeatProblem& prob,
                                                      const SolverOptions& opt = {});

/// Extrapolates ||u||^{-(p-1)} linearly to zero over the final window of the trace.
BlowupEstimate estimate_blowup_time(const SolveTrace& trace, double p, double fit_fraction);

/// E(u) = int (1/2) u_x^2 - |u|^{p+1}/(p+1); gradient on cell midpoints.
double energy_E(const Field& u, double p);

/// S(w) = (1/2) int (w'^2 + w^2/(p-1) - 2|w|^{p+1}/(p+1)) e^{-y^2/4}.
double lyapunov_S(const Field& w, double p);
/// I(w) = (1/2) int w^2 e^{-y^2/4}.
double weighted_I(const Field& w);

/// S_T(u0) written in the original variable; equals S(w0) for
/// w0(y) = T^{1/(p-1)} u0(sqrt(T) y). The Gaussian weight is exp(-x^2 / (4T)).
double scaled_energy_S_T(const Field& u0, double p, double T);

/// One step of w_s = w'' - (1/2) y w' - w/(p-1) + |w|^{p-1} w with the linear part
/// implicit and the nonlinearity explicit; S decreases for any step size.
Field step_w_flow(const Field& w, double ds, double p);

/// Strang step of v_tau = v'' - a y v' - 2a/(p-1) v + |v|^{p-1} v.
/// Ends use the far-field condition y v_y = -2/(p-1) v.
Field step_rescaled(const Field& v, double dtau, double a, double p);

/// Exact flow of u' = |u|^{p-1} u for time s (infinite if it blows up).
double reaction_flow(double u, double s, double p);

/// Homogeneous solution [u0^{1-p} - (p-1) t]^{-1/(p-1)}.
double homogeneous_solution(double u0, double t, double p);

}  // namespace blowup

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace blowup {

/// Potential V(y, s) of the generator -(L0 + V); paths are weighted by exp(-int V).
using Potential = std::function<double(double y, double s)>;

/// 2p alpha/(p-1) - 2p alpha/(p-1+beta y^2): nonnegative, vanishing at y = 0.
double profile_potential(double y, double p, double alpha, double beta);
/// sup_y |d/dy| of the potential above, in closed form.
double profile_potential_gradient_bound(double p, double alpha, double beta);

/// 4 pi sqrt(alpha) (1 - e^{-2 alpha r})^{-1/2}; a factor 4 pi sqrt(2 pi) above the normalised one.
double mehler_unnormalised_prefactor(double alpha, double r);
/// Normalisation of the conjugated kernel: sqrt(alpha / (2 pi (1 - e^{-2 alpha r}))).
double mehler_standard_prefactor(double alpha, double r);

/// Kernel of e^{-alpha z^2/4} e^{-r L0} e^{alpha z^2/4}, L0 = -d^2 + alpha^2 z^2/4 - 5 alpha/2:
/// prefactor * e^{2 alpha r} exp(-alpha (x - e^{-alpha r} y)^2 / (2 (1 - e^{-2 alpha r}))).
/// A non-positive `prefactor` selects the standard one.
double mehler_kernel_U0(double alpha, double r, double x, double y, double prefactor = 0.0);

/// Classical bridge between omega(sigma) = y and omega(tau) = x, solving (-d^2 + alpha^2) w = 0.
double omega0(double alpha, double sigma, double tau, double x, double y, double s);
std::vector<double> omega0_path(double alpha, double sigma, double tau, double x, double y, std::size_t n_steps);

/// Pinned path on n_steps + 1 equally spaced times; values.front() = values.back() = 0.
struct OUBridge {
    std::vector<double> times;
    std::vector<double> values;
};

/// Exact sampler of the discretised bridge. The path density is proportional to
/// exp(-(1/4) int (w'^2 + alpha^2 w^2)), the measure of the generator -d^2 + alpha^2 z^2/4,
/// so the covariance is 2 (-d^2 + alpha^2)^{-1} on the grid.
class BridgeSampler {
public:
    BridgeSampler(double alpha, double sigma, double tau, std::size_t n_steps);

    std::size_t steps() const { return n_; }
    double dt() const { return dt_; }
    std::vector<double> times() const;
    /// Fills `out` (size n_steps + 1) from standard normals `z` (size n_steps - 1).
    void transform(std::span<const double> z, std::span<double> out) const;
    /// Variance of the discretised bridge at each node, aligned with times(); zero at the ends.
    std::vector<double> variances() const;

private:
    double alpha_, sigma_, tau_, dt_;
    std::size_t n_;
    std::vector<double> ldiag_, lsub_;  // Cholesky factor of the precision matrix
};

/// Path `index` of the stream with base seed `seed`.
OUBridge sample_ou_bridge(double alpha, double sigma, double tau, std::size_t n_steps, std::uint64_t seed,
                          std::uint64_t index = 0);

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    std::size_t rejected = 0;
};

struct KernelPoint {
    double x = 0.0;
    double y = 0.0;
};

struct FKOptions {
    std::size_t n_steps = 64;
    /// Kernel prefactor passed to mehler_kernel_U0.
    double prefactor = 0.0;
};

struct FKPointEstimate {
    KernelPoint point;
    MCEstimate weight;  // <exp(-int V)> over bridges
    double U0 = 0.0;
    double U = 0.0;
    double U_std_error = 0.0;
};

/// Monte Carlo kernel U(tau, sigma)(x, y) = U0 <exp(-int V(omega0 + omega, s) ds)> at every point.
/// Bridges are shared between points; path i uses its own counter-seeded stream.
std::vector<FKPointEstimate> fk_kernel_estimate(const Potential& V, double alpha, double sigma, double tau,
                                                std::span<const KernelPoint> points, std::size_t n_paths,
                                                std::uint64_t seed, const FKOptions& opt = {});

/// Kernels of the discretised L0 + V (and of L0) on [-L, L] with Dirichlet ends, conjugated
/// as in mehler_kernel_U0, from grids h and h/2 and Richardson-extrapolated.
struct DirectKernel {
    std::vector<KernelPoint> points;
    std::vector<double> U, U0, ratio;  // extrapolated
    std::vector<double> ratio_fine;    // finest grid only
    double h = 0.0;
};

DirectKernel direct_propagator_kernel(const std::function<double(double)>& V, double alpha, double r,
                                      std::span<const KernelPoint> points, double L = 10.0,
                                      std::size_t N = 801);

struct MehlerCalibration {
    double alpha = 0.0;
    double r = 0.0;
    double constant = 0.0;         // direct / unnormalised kernel at (0, 0)
    double prefactor_ratio = 0.0;  // unnormalised prefactor / calibrated prefactor
    double shape_error = 0.0;      // max relative error of the calibrated kernel on the stencil
};

MehlerCalibration calibrate_mehler(double alpha, double r, std::span<const KernelPoint> points);

struct FKComparisonRow {
    KernelPoint point;
    double mc = 0.0;
    double mc_se = 0.0;
    double direct = 0.0;
    double z = 0.0;  // (mc - direct) / se
};

struct FKComparison {
    std::vector<FKComparisonRow> rows;
    double max_abs_z = 0.0;
    bool ok = false;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

/// Path weights against the direct kernel ratio U/U0 for the time-independent potential V.
FKComparison compare_fk_direct(const std::function<double(double)>& V, double alpha, double r,
                               std::span<const KernelPoint> points, std::size_t n_paths, std::uint64_t seed,
                               double z_limit = 3.0, const FKOptions& opt = {});

struct DerivativeBoundRow {
    double r = 0.0;
    KernelPoint point;
    double derivative = 0.0;
    double std_error = 0.0;
    double bound = 0.0;  // K r + 3 se
    bool ok = false;
};

struct DerivativeBoundReport {
    double K = 0.0;
    std::vector<DerivativeBoundRow> rows;
    bool ok = true;
};

/// Central difference in y of <exp(-int V)>, with common bridges for both sides.
DerivativeBoundReport derivative_bound_check(const Potential& V, double K, double alpha,
                                             std::span<const double> durations,
                                             std::span<const KernelPoint> points, std::size_t n_paths,
                                             std::uint64_t seed, double dy = 1e-2, std::size_t n_steps = 64);

struct DecayTrace {
    std::string name;
    std::vector<double> tau;
    std::vector<double> norm;  // ||<z>^{-3} e^{alpha z^2/4} u||_inf
    double exponent = 0.0;     // fitted decay rate over the second half of the run
};

struct DecayReport {
    double alpha = 0.0;
    double threshold = 0.0;
    double min_exponent = 0.0;
    std::vector<DecayTrace> traces;
    bool ok = false;
};

struct DecayOptions {
    double alpha = 0.5;
    double p = 3.0;
    double beta0 = 0.05;
    /// beta(tau) = 1/(1/beta0 + beta_slope tau); beta_slope = 0 freezes it.
    double beta_slope = 3.0;
    double horizon = 10.0;
    double Z = 20.0;
    std::size_t N = 801;
    double epsilon = 0.1;
};

/// Test functions, given in the conjugated variable f = e^{alpha z^2/4} u.
struct DecayTest {
    std::string name;
    std::function<double(double)> f;
};

std::vector<DecayTest> default_decay_tests(double alpha);

/// Evolves P g under -P L_alpha P (RK4, fourth-order differences in the conjugated variable)
/// and fits the decay exponent of the weighted norm. Throws ConvergenceFailure if the
/// norm stops being finite.
DecayReport propagator_decay_check(const DecayOptions& opt, std::span<const DecayTest> tests);

}  // namespace blowup

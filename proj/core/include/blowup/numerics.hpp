#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace blowup {

/// Thomas algorithm for a general tridiagonal system.
/// `sub[i]` multiplies x[i-1] in row i (sub[0] unused), `sup[i]` multiplies x[i+1]
/// (sup[n-1] unused). Throws ConvergenceFailure on a zero pivot.
std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> sup, std::span<const double> rhs);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    std::size_t count = 0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// First derivative of uniformly sampled data: 5-point quadratic Savitzky-Golay
/// in the interior, second-order one-sided differences at the two ends.
std::vector<double> smoothed_derivative(std::span<const double> f, double dx);

struct SymTridiagEigen {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // unit 2-norm
    std::vector<double> residuals;             // ||A v - lambda v||
};

/// k lowest eigenpairs of the symmetric tridiagonal matrix (diag, off), off.size() == n-1.
/// Sturm-count bisection for the eigenvalues, inverse iteration for the vectors.
SymTridiagEigen sym_tridiag_lowest(std::span<const double> diag, std::span<const double> off,
                                   std::size_t k, bool want_vectors = true);

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below x.
std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double x);

}  // namespace blowup

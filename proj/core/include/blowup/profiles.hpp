#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "blowup/grid.hpp"

namespace blowup {

/// Profile parameters with the gauge a = l c + (1 - l)/2 (l = 2 gives c = a/2 + 1/4).
struct ProfileParams {
    double a = 0.5;
    double b = 0.0;
    double c = 0.5;
    double l = 2.0;

    static ProfileParams from_a(double a, double b, double l = 2.0) {
        return {a, b, (a - 0.5 * (1.0 - l)) / l, l};
    }
    static ProfileParams from_c(double c, double b, double l = 2.0) {
        return {l * c + 0.5 * (1.0 - l), b, c, l};
    }
    double gauge_defect() const { return a - (l * c + 0.5 * (1.0 - l)); }
};

enum class ProfileKind { v_a, v_ab, V_ab, v_abc };

/// v_a = (2a/(p-1))^{1/(p-1)}, v_ab = (2a/(p-1+b y^2))^{1/(p-1)},
/// V_ab = (2c/(p-1+b y^2))^{1/(p-1)}, v_abc = V_ab e^{-a y^2/4}.
double profile_value(ProfileKind kind, const ProfileParams& pp, double p, double y);
Field profile(ProfileKind kind, const ProfileParams& pp, double p, const Grid& g);

/// Normalized Hermite functions (a/2pi)^{1/4} He_n(sqrt(a) y) e^{-a y^2/4} / sqrt(n!),
/// with the sign of n = 2 flipped so that phi_2 = (a/8pi)^{1/4} (1 - a y^2) e^{-a y^2/4}.
double hermite_value(int n, double a, double y);
Field hermite_phi(int n, double a, const Grid& g);

enum class OperatorKind {
    L_abc,       // -d^2 + (a^2 + a_tau) y^2/4 - a/2 + 2a/(p-1) - 2pc/(p-1+b y^2)
    L0_a,        // -d^2 + a^2 y^2/4 - a/2
    L0_shifted,  // -d^2 + alpha^2 z^2/4 - 5 alpha/2
    L_alpha,     // L0_shifted + 2p alpha/(p-1) - 2p alpha/(p-1+beta z^2)
};
std::string to_string(OperatorKind k);

struct OperatorParams {
    ProfileParams prof;
    double p = 3.0;
    double a_tau = 0.0;
    double alpha = 0.5;
    double beta = 0.05;
};

/// Potential term of each operator (everything except -d^2).
std::function<double(double)> operator_potential(OperatorKind kind, const OperatorParams& op);

/// Second-order discretisation on the interior nodes (Dirichlet at +-L).
struct OperatorMatrix {
    OperatorKind kind = OperatorKind::L0_a;
    OperatorParams params;
    Grid grid{1.0, 5};
    std::vector<double> diag;      // interior nodes 1..N-2
    double off = 0.0;              // -1/h^2
    std::vector<double> offdiag() const { return std::vector<double>(diag.size() - 1, off); }
    /// Applies the matrix to a field (boundary values ignored, returned as 0).
    Field apply(const Field& f) const;
};

OperatorMatrix assemble(OperatorKind kind, const OperatorParams& op, const Grid& g);

struct Spectrum {
    std::vector<double> values;
    std::vector<Field> vectors;       // unit L2 (trapezoid) norm, positive at the first large entry
    std::vector<double> residuals;    // ||A v - lambda v|| / ||v|| in the 2-norm
};

/// k lowest eigenpairs by Sturm bisection + inverse iteration.
Spectrum eigen_spectrum(const OperatorMatrix& op, std::size_t k, bool want_vectors = true);

/// Eigenvalues Richardson-extrapolated from grids h and h/2: (4 lambda_{h/2} - lambda_h)/3.
std::vector<double> extrapolated_eigenvalues(const OperatorMatrix& op, std::size_t k);

struct EigenBoundRow {
    int n = 0;
    double lambda = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double margin = 0.0;  // min(lambda - lower, upper - lambda)
};

struct EigenBoundReport {
    bool ok = true;
    double slack = 0.0;
    std::vector<EigenBoundRow> rows;
    std::vector<EigenBoundRow> violations;
};

/// n a + 2a/(p-1) >= lambda_n >= n a + 2(a - p c)/(p-1), allowing `slack`.
EigenBoundReport check_eigen_bounds(double p, const ProfileParams& pp, std::span<const double> spectrum,
                                    double slack = 1e-5);

enum class ProjectionPart { low, complement };

/// low = sum_{n<=2} <phi_n, f> phi_n at scale alpha; complement = f - low.
Field project_P(double alpha, const Field& f, ProjectionPart which);

}  // namespace blowup

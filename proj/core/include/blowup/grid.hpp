#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace blowup {

enum class Parity { none, even, odd };

/// Uniform grid on [-L, L] with an odd number of nodes, so y = 0 is a node.
class Grid {
public:
    Grid(double half_width, std::size_t num_points);

    double half_width() const { return L_; }
    std::size_t size() const { return n_; }
    double spacing() const { return h_; }
    std::size_t center() const { return n_ / 2; }

    /// Node i, computed from the center so that node(c - k) == -node(c + k) exactly.
    double node(std::size_t i) const {
        return (static_cast<double>(i) - static_cast<double>(n_ / 2)) * h_;
    }
    std::vector<double> nodes() const;

    /// Same interval, half the spacing.
    Grid refined() const { return Grid(L_, 2 * n_ - 1); }

    bool operator==(const Grid& o) const { return L_ == o.L_ && n_ == o.n_; }

private:
    double L_;
    std::size_t n_;
    double h_;
};

/// Real samples on a grid with a parity tag.
struct Field {
    Grid grid;
    std::vector<double> values;
    Parity parity = Parity::none;

    explicit Field(const Grid& g, Parity par = Parity::none)
        : grid(g), values(g.size(), 0.0), parity(par) {}
    Field(const Grid& g, std::vector<double> v, Parity par = Parity::none);

    static Field sample(const Grid& g, const std::function<double(double)>& f,
                        Parity par = Parity::none);

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    double sup_norm() const;
    bool all_finite() const;
    /// Largest parity defect relative to the sup norm (0 for Parity::none).
    double parity_defect() const;
    /// Projects onto the tagged parity class; no-op for Parity::none. Keeps round-off
    /// from seeding modes of the other class.
    void enforce_parity();
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
/// Pointwise product; even*even and odd*odd are even, even*odd is odd.
Field operator*(const Field& a, const Field& b);
Field operator*(double s, const Field& a);

Parity product_parity(Parity a, Parity b);

/// Weight <y>^{-n} e^{q y^2 / 4}, with <y> = (1 + y^2)^{1/2}.
struct WeightSpec {
    int n = 0;
    double q = 0.0;

    double log_weight(double y) const {
        return -0.5 * n * std::log1p(y * y) + 0.25 * q * y * y;
    }
};

/// max_i |w(y_i) f(y_i)|; throws WeightOverflow if the product is not finite.
double weighted_sup_norm(const Field& f, const WeightSpec& w);

/// Trapezoid approximation of the integral of f g.
double l2_inner(const Field& f, const Field& g);

/// Trapezoid integral of f.
double integrate(const Field& f);

enum class CutoffSide { geq, leq };

/// Indicator of |y| >= D (geq) or of the complement |y| < D (leq).
Field cutoff_chi(const Grid& g, double D, CutoffSide side);

/// Cubic (4-point Lagrange) interpolation; zero outside [-L, L].
/// Even and odd fields are evaluated at |x| and reflected, so parity is exact.
double interpolate(const Field& f, double x);

}  // namespace blowup

#include "blowup/grid.hpp"

#include <algorithm>
#include <limits>

#include "blowup/error.hpp"

namespace blowup {

Grid::Grid(double half_width, std::size_t num_points) : L_(half_width), n_(num_points) {
    if (!(half_width > 0.0)) throw DomainError("grid half width must be positive");
    if (num_points < 5 || num_points % 2 == 0)
        throw DomainError("grid needs an odd number of nodes (>= 5)");
    h_ = 2.0 * L_ / static_cast<double>(n_ - 1);
}

std::vector<double> Grid::nodes() const {
    std::vector<double> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = node(i);
    return y;
}

Field::Field(const Grid& g, std::vector<double> v, Parity par)
    : grid(g), values(std::move(v)), parity(par) {
    if (values.size() != grid.size()) throw GridMismatch();
}

Field Field::sample(const Grid& g, const std::function<double(double)>& f, Parity par) {
    Field out(g, par);
    for (std::size_t i = 0; i < g.size(); ++i) out.values[i] = f(g.node(i));
    return out;
}

double Field::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

bool Field::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void Field::enforce_parity() {
    if (parity == Parity::none) return;
    const std::size_t n = values.size();
    const double sgn = parity == Parity::even ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n / 2; ++i) {
        const double m = 0.5 * (values[i] + sgn * values[n - 1 - i]);
        values[i] = m;
        values[n - 1 - i] = sgn * m;
    }
    if (parity == Parity::odd) values[n / 2] = 0.0;
}

double Field::parity_defect() const {
    if (parity == Parity::none) return 0.0;
    const double s = parity == Parity::even ? 1.0 : -1.0;
    const double norm = sup_norm();
    if (norm == 0.0) return 0.0;
    double d = 0.0;
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n / 2; ++i)
        d = std::max(d, std::abs(values[n - 1 - i] - s * values[i]));
    return d / norm;
}

Parity product_parity(Parity a, Parity b) {
    if (a == Parity::none || b == Parity::none) return Parity::none;
    return a == b ? Parity::even : Parity::odd;
}

namespace {
Parity sum_parity(Parity a, Parity b) { return a == b ? a : Parity::none; }

template <class Op>
Field combine(const Field& a, const Field& b, Parity par, Op op) {
    if (!(a.grid == b.grid)) throw GridMismatch();
    Field out(a.grid, par);
    for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = op(a.values[i], b.values[i]);
    return out;
}
}  // namespace

Field operator+(const Field& a, const Field& b) {
    return combine(a, b, sum_parity(a.parity, b.parity), [](double x, double y) { return x + y; });
}
Field operator-(const Field& a, const Field& b) {
    return combine(a, b, sum_parity(a.parity, b.parity), [](double x, double y) { return x - y; });
}
Field operator*(const Field& a, const Field& b) {
    return combine(a, b, product_parity(a.parity, b.parity), [](double x, double y) { return x * y; });
}
Field operator*(double s, const Field& a) {
    Field out = a;
    for (double& v : out.values) v *= s;
    return out;
}

double weighted_sup_norm(const Field& f, const WeightSpec& w) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = f.values[i];
        if (v == 0.0) continue;
        const double y = f.grid.node(i);
        const double r = std::abs(v) * std::exp(w.log_weight(y));
        if (!std::isfinite(r)) throw WeightOverflow(i, y);
        m = std::max(m, r);
    }
    return m;
}

double l2_inner(const Field& f, const Field& g) {
    if (!(f.grid == g.grid)) throw GridMismatch();
    const std::size_t n = f.size();
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) s += f.values[i] * g.values[i];
    s += 0.5 * (f.values[0] * g.values[0] + f.values[n - 1] * g.values[n - 1]);
    return s * f.grid.spacing();
}

double integrate(const Field& f) {
    const std::size_t n = f.size();
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) s += f.values[i];
    s += 0.5 * (f.values[0] + f.values[n - 1]);
    return s * f.grid.spacing();
}

Field cutoff_chi(const Grid& g, double D, CutoffSide side) {
    if (D < 0.0) throw DomainError("cutoff radius must be nonnegative");
    Field out(g, Parity::even);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const bool outer = std::abs(g.node(i)) >= D;
        out.values[i] = (side == CutoffSide::geq) == outer ? 1.0 : 0.0;
    }
    return out;
}

double interpolate(const Field& f, double x) {
    double sign = 1.0;
    if (f.parity != Parity::none && x < 0.0) {
        if (f.parity == Parity::odd) sign = -1.0;
        x = -x;
    }
    const Grid& g = f.grid;
    const double L = g.half_width();
    if (x < -L || x > L) return 0.0;
    const double s = x / g.spacing() + static_cast<double>(g.center());
    const auto n = static_cast<long>(g.size());
    long base = static_cast<long>(std::floor(s)) - 1;
    base = std::clamp(base, 0L, n - 4);
    const double t = s - static_cast<double>(base);
    double r = 0.0;
    for (int k = 0; k < 4; ++k) {
        double w = 1.0;
        for (int j = 0; j < 4; ++j)
            if (j != k) w *= (t - j) / static_cast<double>(k - j);
        r += w * f.values[static_cast<std::size_t>(base + k)];
    }
    return sign * r;
}

}  // namespace blowup

#include "qwave/field.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace qwave {

namespace {

// Centered slopes with one-sided parabolic ends (exact for quadratics).
std::vector<double> centered_slopes(const Grid1D& grid, const std::vector<double>& y) {
    const std::size_t n = y.size();
    const double h = grid.spacing();
    std::vector<double> m(n, 0.0);
    if (n == 2) {
        m[0] = m[1] = (y[1] - y[0]) / h;
        return m;
    }
    auto secant = [&](std::size_t k) { return (y[k + 1] - y[k]) / h; };
    m[0] = 1.5 * secant(0) - 0.5 * secant(1);
    m[n - 1] = 1.5 * secant(n - 2) - 0.5 * secant(n - 3);
    for (std::size_t k = 1; k + 1 < n; ++k) m[k] = 0.5 * (secant(k - 1) + secant(k));
    return m;
}

// The same slopes limited to the Fritsch–Carlson monotone region: zero at
// local extrema, magnitude at most 3x the smaller adjacent secant.
std::vector<double> monotone_slopes(const Grid1D& grid, const std::vector<double>& y) {
    const std::size_t n = y.size();
    const double h = grid.spacing();
    std::vector<double> m = centered_slopes(grid, y);
    if (n == 2) return m;
    auto secant = [&](std::size_t k) { return (y[k + 1] - y[k]) / h; };

    auto limit = [](double slope, double d_near) {
        if (d_near == 0.0) return 0.0;
        if (slope * d_near <= 0.0) return 0.0;
        const double cap = 3.0 * std::abs(d_near);
        return std::clamp(slope, -cap, cap);
    };

    m[0] = limit(m[0], secant(0));
    m[n - 1] = limit(m[n - 1], secant(n - 2));
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double dl = secant(k - 1);
        const double dr = secant(k);
        if (dl * dr <= 0.0) {
            m[k] = 0.0;
            continue;
        }
        const double cap = 3.0 * std::min(std::abs(dl), std::abs(dr));
        m[k] = std::clamp(m[k], -cap, cap);
    }
    return m;
}

}  // namespace

ScalarField1D::ScalarField1D(Grid1D grid, std::vector<double> values, InterpMode mode)
    : grid_(grid), mode_(mode) {
    if (values.size() != grid.size())
        throw std::invalid_argument("ScalarField1D: values length does not match grid");
    values_ = std::make_shared<const std::vector<double>>(std::move(values));
    if (mode_ == InterpMode::cubic_monotone)
        slopes_ = std::make_shared<const std::vector<double>>(monotone_slopes(grid_, *values_));
    else if (mode_ == InterpMode::cubic)
        slopes_ = std::make_shared<const std::vector<double>>(centered_slopes(grid_, *values_));
}

double ScalarField1D::interpolate(double x) const {
    if (!grid_.contains(x))
        throw OutOfDomainError("interpolate: x = " + std::to_string(x) + " outside [" +
                               std::to_string(grid_.x_min) + ", " + std::to_string(grid_.x_max) + "]");
    return eval(x);
}

double ScalarField1D::eval(double x) const {
    const std::size_t k = grid_.cell_index(x);
    const double t = (x - grid_.node(k)) / grid_.spacing();
    return eval_in_cell(k, t);
}

double ScalarField1D::eval_in_cell(std::size_t k, double t) const {
    const auto& y = *values_;
    if (t == 0.0) return y[k];
    if (t == 1.0) return y[k + 1];
    if (mode_ == InterpMode::linear) return y[k] + t * (y[k + 1] - y[k]);
    const auto& m = *slopes_;
    const double h = grid_.spacing();
    const double t2 = t * t;
    const double t3 = t2 * t;
    // difference form: exact on constant data regardless of rounding
    const double h01 = 3.0 * t2 - 2.0 * t3;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h11 = t3 - t2;
    return y[k] + h01 * (y[k + 1] - y[k]) + h * (h10 * m[k] + h11 * m[k + 1]);
}

double ScalarField1D::min_value() const {
    double v = std::numeric_limits<double>::infinity();
    for (double y : *values_) v = std::min(v, y);
    return v;
}

double ScalarField1D::max_value() const {
    double v = -std::numeric_limits<double>::infinity();
    for (double y : *values_) v = std::max(v, y);
    return v;
}

double weighted_sup(const ScalarField1D& f, double p) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = std::pow(bracket_weight(f.grid().node(i)), p);
        s = std::max(s, w * std::abs(f.value(i)));
    }
    return s;
}

double weighted_inf(const ScalarField1D& f, double p) {
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = std::pow(bracket_weight(f.grid().node(i)), p);
        s = std::min(s, w * f.value(i));
    }
    return s;
}

ScalarField1D sample_expression(const Expr& expr, const Grid1D& grid, InterpMode mode) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        v[i] = expr.eval(grid.node(i));
        if (!std::isfinite(v[i]))
            throw ExprError("expression evaluates to a non-finite value at x = " +
                            std::to_string(grid.node(i)));
    }
    return ScalarField1D(grid, std::move(v), mode);
}

ScalarField1D spatial_derivative(const ScalarField1D& f) {
    const std::size_t n = f.size();
    if (n < 3) throw std::invalid_argument("spatial_derivative: need at least 3 points");
    const double h = f.grid().spacing();
    const auto& y = f.values();
    std::vector<double> d(n);
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    return ScalarField1D(f.grid(), std::move(d), f.mode());
}

}  // namespace qwave

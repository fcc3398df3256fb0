#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "qwave/expr.hpp"
#include "qwave/grid.hpp"

namespace qwave {

enum class InterpMode { linear, cubic_monotone, cubic };

/// Interpolation used for the signed data fields (R, S, V, W) riding on a
/// grid whose u-field uses `mode`: the monotone limiter exists to keep the
/// positive speed field u from under-shooting, but it costs two orders of
/// accuracy at interior extrema, so signed data uses the unlimited cubic.
inline InterpMode data_interp(InterpMode mode) {
    return mode == InterpMode::cubic_monotone ? InterpMode::cubic : mode;
}

/// ⟨x⟩ = (1 + x²)^(1/2), the weight of every decay norm used here.
inline double bracket_weight(double x) { return std::sqrt(1.0 + x * x); }

class OutOfDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable sampled function on a uniform grid.
///
/// cubic_monotone uses Hermite cubics with centered slopes limited per
/// Fritsch–Carlson, so interpolated values never leave the local data
/// range; cubic is the same Hermite without the limiter (fourth order on
/// smooth data); linear is first order and also range-preserving.
class ScalarField1D {
public:
    ScalarField1D() = default;
    ScalarField1D(Grid1D grid, std::vector<double> values,
                  InterpMode mode = InterpMode::cubic_monotone);

    const Grid1D& grid() const { return grid_; }
    const std::vector<double>& values() const { return *values_; }
    double value(std::size_t i) const { return (*values_)[i]; }
    std::size_t size() const { return grid_.size(); }
    InterpMode mode() const { return mode_; }

    /// Interpolated value; exact at nodes. Throws OutOfDomainError outside the grid.
    double interpolate(double x) const;

    /// Interpolated value with x clamped into the grid (flat extension at the
    /// edges); used where finite propagation keeps the overshoot harmless.
    double interpolate_clamped(double x) const { return eval(grid_.clamp(x)); }

    /// Low-level: value at local coordinate t ∈ [0,1] inside cell k. Callers
    /// that evaluate several fields on one grid at the same x share the cell
    /// lookup this way.
    double eval_in_cell(std::size_t k, double t) const;

    double min_value() const;
    double max_value() const;

private:
    double eval(double x) const;

    Grid1D grid_{};
    std::shared_ptr<const std::vector<double>> values_;
    std::shared_ptr<const std::vector<double>> slopes_;  // cubic mode only
    InterpMode mode_ = InterpMode::cubic_monotone;
};

/// max over nodes of ⟨x_i⟩^p |f(x_i)|.
double weighted_sup(const ScalarField1D& f, double p);

/// min over nodes of ⟨x_i⟩^p f(x_i) (signed; the lower-bound companion).
double weighted_inf(const ScalarField1D& f, double p);

/// Pointwise evaluation of a closed-form expression on a grid.
/// Throws ExprError with the offending node if a value is non-finite.
ScalarField1D sample_expression(const Expr& expr, const Grid1D& grid,
                                InterpMode mode = InterpMode::cubic_monotone);

/// Second-order finite differences: central inside, one-sided at the ends.
ScalarField1D spatial_derivative(const ScalarField1D& f);

}  // namespace qwave

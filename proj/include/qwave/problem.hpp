#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qwave/expr.hpp"
#include "qwave/field.hpp"
#include "qwave/grid.hpp"

namespace qwave {

enum class CoefficientMode { power, general };

/// Lower-order flux F in the equation u_tt = (u^{2a} u_x)_x + F(u) u_x.
struct FluxSpec {
    enum class Kind { zero, power, general };
    Kind kind = Kind::zero;
    double lambda = 0.0;  // power: F(θ) = λ θ^b
    double b = 0.0;
    Expr expr;        // general only
    Expr expr_prime;  // symbolic derivative, filled at construction

    static FluxSpec zero() { return {}; }
    static FluxSpec power(double lambda, double b);
    static FluxSpec general(const Expr& f);

    bool is_zero() const { return kind == Kind::zero || (kind == Kind::power && lambda == 0.0); }
    double value(double theta) const;
    double deriv(double theta) const;
};

struct ProblemSpec {
    double exponent_a = 0.0;
    CoefficientMode coefficient_mode = CoefficientMode::power;
    Expr c_expr, c_prime, c_second;  // general mode (derivatives derived)
    FluxSpec flux_F;
    Expr u0_expr, u1_expr;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;  // derived from (a, alpha)
    double K_bound = 1.0;

    /// Propagation-speed coefficient: u^a (power) or c(u) (general).
    double speed_coefficient(double u) const;
    /// Its derivative in u: a u^(a-1) or c'(u).
    double speed_coefficient_deriv(double u) const;
};

/// Switch a spec to general-coefficient mode; c' and c'' are derived symbolically.
void set_general_coefficient(ProblemSpec& spec, const Expr& c);

/// γ(a, α): 0 for a ≥ 1, (1−a)α otherwise.
double derive_gamma(double a, double alpha);

struct AssumptionViolation {
    std::string condition;  // "positivity", "non-finite", "(ab1)", "(ab2)"
    double worst_x = 0.0;
    double worst_ratio = 0.0;
};

struct AssumptionReport {
    bool passed = false;
    double measured_c1 = 0.0;  // inf ⟨x⟩^α u0
    double measured_c2 = 0.0;  // sup u0
    double measured_c3 = 0.0;  // sup ⟨x⟩^β |u1 ± u0^a u0'|
    double measured_c4 = 0.0;  // sup ⟨x⟩^γ |d/dx (u1 ± u0^a u0')|
    double measured_B1 = 0.0;  // sup ⟨x⟩^β u0^a |u0'|
    std::vector<AssumptionViolation> violations;
};

/// Samples u0, u0', u1, u1' on the probe grid and measures the best
/// constants in the decay assumptions; exponent inequalities are checked
/// per regime (α ≤ β binds for a ≤ 1, aα ≤ β for a ≥ 1).
AssumptionReport validate_assumptions(const ProblemSpec& spec, const Grid1D& probe_grid);

struct LeviReport {
    bool passed = false;
    double measured_C_K = 0.0;      // sup |F(θ)| / θ^a
    double measured_C_K_prime = 0.0;  // sup |F'(θ)| / θ^(a-1)
    double measured_C_all = 0.0;    // max over every checked ratio (slab policy input)
    std::vector<std::string> violations;
};

/// Levi-condition probe on log-spaced θ ∈ (K·1e-8, K]; flags ratios that
/// exceed `cap` or grow monotonically through the last decade toward θ→0.
/// General coefficient mode additionally checks c, c', c''.
LeviReport check_levi(const ProblemSpec& spec, std::size_t n_samples, double cap = 1e6);

/// R0 = u1 + u0^a u0', S0 = u1 - u0^a u0' (general mode: c(u0) in place of u0^a).
std::pair<ScalarField1D, ScalarField1D> initial_invariants(const ProblemSpec& spec,
                                                           const Grid1D& grid,
                                                           InterpMode mode = InterpMode::cubic_monotone);

struct InitialFields {
    ScalarField1D u0, R0, S0, V0, W0;  // V0 = R0', W0 = S0' (symbolic)
};

/// Everything a slab needs at t = 0, all from symbolic differentiation.
InitialFields initial_fields(const ProblemSpec& spec, const Grid1D& grid,
                             InterpMode mode = InterpMode::cubic_monotone);

}  // namespace qwave

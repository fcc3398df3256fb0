#pragma once

#include <string>
#include <vector>

#include "qwave/solver.hpp"

namespace qwave {

/// Measured analogues of the decay constants C1..C4 on one time level.
struct DecayLevel {
    double t = 0.0;
    double c1 = 0.0;  // inf ⟨x⟩^α u
    double c2 = 0.0;  // sup u
    double c3 = 0.0;  // max(‖⟨x⟩^β R‖, ‖⟨x⟩^β S‖)
    double c4 = 0.0;  // max γ-weighted sup over {∂t R, ∂x R, ∂t S, ∂x S}
    double c4_dx = 0.0;  // the ∂x pair alone
    double c4_dt = 0.0;  // the ∂t pair alone
};

struct DecayReport {
    std::vector<DecayLevel> levels;
    double margin = 4.0;
    bool c1_pass = true;  // every level ≥ initial c1 / 2
    bool c2_pass = true;  // every level ≤ margin × initial c2
    bool c3_pass = true;  // every level ≤ margin × max(initial c3, floor)
    bool c4_pass = true;
    bool all_pass() const { return c1_pass && c2_pass && c3_pass && c4_pass; }
};

/// Weighted-decay monitoring of a computed solution. ∂t R and ∂t S come from
/// the transport equations (u^a V + N1 + L and −u^a W + N2 + L), not from
/// time differencing.
DecayReport decay_report(const Solution& solution, const ProblemSpec& spec, double margin = 4.0);

enum class BreakdownKind { none, blowup, degeneracy, characteristic_crossing };

struct BreakdownFlag {
    BreakdownKind kind = BreakdownKind::none;
    double time = 0.0;
    double witness_x = 0.0;
    double witness_value = 0.0;
};

struct BreakdownThresholds {
    double blowup_cap = 1e3;
    double degeneracy_floor_fraction = 1e-3;
};

/// Scans levels in time order and returns the earliest threshold crossing:
/// blow-up when ‖⟨x⟩^β u_t‖ + ‖⟨x⟩^β u_x‖ exceeds the cap, degeneracy when
/// inf ⟨x⟩^α u falls below fraction × initial, crossing when a stored
/// Jacobian is ≤ 0.
BreakdownFlag detect_breakdown(const Solution& solution, const ProblemSpec& spec,
                               const BreakdownThresholds& thresholds);

struct SignPreservationReport {
    double min_R = 0.0;
    double min_S = 0.0;
    bool initial_nonnegative = false;
    bool preserved = false;
};

/// Global minima of stored R and S; the preservation claim applies to F ≡ 0
/// and nonnegative initial invariants. Throws if F is not identically zero.
SignPreservationReport sign_preservation_check(const Solution& solution, const ProblemSpec& spec);

struct ConservationReport {
    double sup_ut_minus_vx = 0.0;      // |u_t − v_x| with v = ∫ u_t dy
    double sup_momentum_residual = 0.0;  // |v_t − ∂x σ(u) − G(u)|
};

/// Conservation-pair consistency check: v(t,x) = ∫_{x_min}^x u_t dy by
/// composite trapezoid, σ'(u) = u^{2a} (so σ matches the flux of the wave
/// equation; at a = 0 this is the textbook u^{a+1}/(a+1)), G the closed-form
/// primitive of a power-law F. Sup over interior nodes and levels.
ConservationReport conservation_form_residual(const Solution& solution, const ProblemSpec& spec);

struct JacobianBoundReport {
    double measured_C = 0.0;   // sup |a u^(a-1) u_x| over the slab (incl. path samples)
    double min_jacobian = 1.0;
    double worst_margin = 0.0;  // max over levels of jac_max / e^{C Δt}
    bool passed = false;        // 0 < ∂x x± ≤ e^{C Δt} on every level
};

/// Checks 0 < ∂ₓx± ≤ e^{C Δt} on the stored per-level Jacobian ranges of
/// one slab, with C the measured sup of the speed's spatial derivative.
JacobianBoundReport jacobian_bound_check(const SlabState& slab, const ProblemSpec& spec);

}  // namespace qwave

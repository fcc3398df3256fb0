#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "qwave/characteristics.hpp"
#include "qwave/field.hpp"
#include "qwave/grid.hpp"
#include "qwave/problem.hpp"

namespace qwave {

class DegenerateStateError : public std::runtime_error {
public:
    DegenerateStateError(double t, double x, double u)
        : std::runtime_error("degenerate state: u = " + std::to_string(u) + " at (t, x) = (" +
                             std::to_string(t) + ", " + std::to_string(x) + ")"),
          t(t),
          x(x),
          u(u) {}
    double t, x, u;
};

/// Time slab [t0, t0 + (m-1) dt] with m stored levels.
struct Slab {
    double t0 = 0.0;
    double dt = 0.0;
    std::size_t m = 2;

    double t1() const { return t0 + dt * static_cast<double>(m - 1); }
    double time(std::size_t j) const { return t0 + dt * static_cast<double>(j); }
};

/// The triple (u, R, S) plus the derivative fields (V = R_x, W = S_x) on one
/// slab; level 0 always carries the slab's initial data. jac_min/jac_max and
/// rate_max per level come from the most recent derivative sweep.
struct SlabState {
    Slab slab;
    Grid1D grid;
    std::vector<ScalarField1D> u, R, S, V, W;
    std::vector<double> jac_min, jac_max, rate_max;
};

struct ContractionStats {
    std::size_t iterations = 0;
    std::vector<double> distances;  // d_k = ‖Δu‖ + ‖ΔR‖ + ‖ΔS‖ per sweep
    double factor = 0.0;            // median of d_{k+1} / d_k
    bool converged = false;
};

enum class Termination {
    reached_target_T,
    breakdown_blowup,
    breakdown_degeneracy,
    contraction_failure,
};

struct Solution {
    std::vector<SlabState> slabs;
    std::vector<ContractionStats> stats;
    Termination termination = Termination::reached_target_T;
    double reached_T = 0.0;
};

struct SourceTerms {
    double N1, N2, L;
};

struct SourcePartials {
    double N1u, N1R, N1S;
    double N2u, N2R, N2S;
    double Lu, LR, LS;
};

/// Transport sources of the diagonalized system:
///   power mode   N1 = (a/2u)(R² − RS), N2 = (a/2u)(S² − RS), L = F(u)(R−S)/(2u^a)
///   general mode the same with a/(2u) replaced by c'(u)/(2c(u)) and u^a by c(u),
/// which reproduces power mode exactly at c(u) = u^a.
SourceTerms evaluate_sources(double u, double R, double S, const ProblemSpec& spec);

/// Closed-form partial derivatives of N1, N2, L in (u, R, S).
SourcePartials evaluate_source_partials(double u, double R, double S, const ProblemSpec& spec);

/// Initial data of one slab (level-0 fields).
struct SlabInitial {
    ScalarField1D u0, R0, S0, V0, W0;
};

/// Constant-in-time extension of initial fields, the Picard starting iterate.
SlabState make_initial_state(const SlabInitial& initial, const Slab& slab, const Grid1D& grid);

/// SpeedProvider over a slab state: speed = v^a (or c(v)) with v linearly
/// interpolated between stored levels, and the slope a v^(a-1) v_x with
/// v_x = (R̄ − S̄)/(2 v^a). Spatial lookups clamp to the grid.
class StateSpeed {
public:
    StateSpeed(const SlabState& state, const ProblemSpec& spec) : state_(&state), spec_(&spec) {}

    double speed(double t, double x) const;
    double speed_x(double t, double x) const;

private:
    const SlabState* state_;
    const ProblemSpec* spec_;
};

/// One application of the contraction map Φ: solves the linear transport
/// system along the input state's characteristics and rebuilds u from
/// u0 + ∫ (R+S)/2. Level 0 of the output equals level 0 of the input.
/// The derivative fields V, W are refreshed along the same paths.
SlabState apply_phi(const SlabState& input, const ProblemSpec& spec);

/// The V/W half of a sweep on its own.
std::pair<std::vector<ScalarField1D>, std::vector<ScalarField1D>> update_derivatives(
    const SlabState& input, const ProblemSpec& spec);

/// Sum of the u, R and S sup-distances between two states on the same slab.
double sup_distance(const SlabState& a, const SlabState& b);

enum class SlabSignal { ok, degeneracy };

struct SlabResult {
    SlabState state;
    ContractionStats stats;
    SlabSignal signal = SlabSignal::ok;
};

/// Picard iteration of Φ from the constant-in-time extension of the initial
/// fields. Stops at sup-distance ≤ tol, at max_iter, or after the distance
/// fails to decrease three times in a row. u dropping to degeneracy_floor_abs
/// anywhere aborts with SlabSignal::degeneracy.
SlabResult solve_slab(const ProblemSpec& spec, const SlabInitial& initial, const Slab& slab,
                      const Grid1D& grid, double tol, std::size_t max_iter,
                      double degeneracy_floor_abs = 0.0);

struct SolverOptions {
    double T_target = 0.1;
    double tol = 1e-10;
    std::size_t max_iter = 30;
    std::size_t levels_per_slab = 65;
    std::optional<double> initial_slab_length;  // nullopt: auto policy
    InterpMode interpolation = InterpMode::cubic_monotone;
    double blowup_cap = 1e3;
    double degeneracy_floor_fraction = 1e-3;
};

/// Initial slab length min(0.1, 0.5 / (1 + sup|a u0^(a-1) (u0^a u0')| + C_K)).
double slab_length_policy(const ProblemSpec& spec, const Grid1D& grid);

/// Concatenates slab fixed points until T_target, re-basing the initial
/// fields at each boundary; halves the slab on contraction failure down to a
/// floor of 4 dt. Breakdown thresholds are checked on every completed slab.
Solution continue_solution(const ProblemSpec& spec, const Grid1D& grid,
                           const SolverOptions& options);

/// u_t = (R+S)/2 and u_x = (R−S)/(2u^a) (general mode: 2c(u)).
std::pair<ScalarField1D, ScalarField1D> recover_gradients(const ScalarField1D& u,
                                                          const ScalarField1D& R,
                                                          const ScalarField1D& S,
                                                          const ProblemSpec& spec);

/// View of the solution's deduplicated time levels in order.
struct LevelView {
    double t;
    const ScalarField1D* u;
    const ScalarField1D* R;
    const ScalarField1D* S;
    const ScalarField1D* V;
    const ScalarField1D* W;
    double jac_min, jac_max, rate_max;
};
std::vector<LevelView> solution_levels(const Solution& solution);

struct PdeResidualLevel {
    double t;
    double sup;
};

struct PdeResidualReport {
    std::vector<PdeResidualLevel> levels;  // interior time levels per slab
    double max_sup = 0.0;
};

/// |u_tt − ∂x(u^{2a} u_x) − F(u) u_x| with central differences on the stored
/// solution, sup over interior nodes per level.
PdeResidualReport pde_residual(const Solution& solution, const ProblemSpec& spec);

}  // namespace qwave

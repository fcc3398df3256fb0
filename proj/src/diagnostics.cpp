#include "qwave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qwave {

namespace {

// ∂t R = u^a V + N1 + L and ∂t S = −u^a W + N2 + L from the transport system.
void time_derivatives(const LevelView& lv, const ProblemSpec& spec, std::vector<double>& Rt,
                      std::vector<double>& St) {
    const std::size_t n = lv.u->size();
    Rt.resize(n);
    St.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = lv.u->value(i);
        const double R = lv.R->value(i);
        const double S = lv.S->value(i);
        const SourceTerms src = evaluate_sources(u, R, S, spec);
        const double c = spec.speed_coefficient(u);
        Rt[i] = c * lv.V->value(i) + src.N1 + src.L;
        St[i] = -c * lv.W->value(i) + src.N2 + src.L;
    }
}

}  // namespace

DecayReport decay_report(const Solution& solution, const ProblemSpec& spec, double margin) {
    DecayReport rep;
    rep.margin = margin;
    const auto levels = solution_levels(solution);
    std::vector<double> Rt, St;
    for (const LevelView& lv : levels) {
        DecayLevel d;
        d.t = lv.t;
        d.c1 = weighted_inf(*lv.u, spec.alpha);
        d.c2 = lv.u->max_value();
        d.c3 = std::max(weighted_sup(*lv.R, spec.beta), weighted_sup(*lv.S, spec.beta));
        d.c4_dx = std::max(weighted_sup(*lv.V, spec.gamma), weighted_sup(*lv.W, spec.gamma));
        time_derivatives(lv, spec, Rt, St);
        const ScalarField1D Rtf(lv.u->grid(), Rt, lv.u->mode());
        const ScalarField1D Stf(lv.u->grid(), St, lv.u->mode());
        d.c4_dt = std::max(weighted_sup(Rtf, spec.gamma), weighted_sup(Stf, spec.gamma));
        d.c4 = std::max(d.c4_dx, d.c4_dt);
        rep.levels.push_back(d);
    }
    if (rep.levels.empty()) return rep;

    const DecayLevel& first = rep.levels.front();
    const double floor = 1e-12;
    for (const DecayLevel& d : rep.levels) {
        if (!std::isfinite(d.c1) || d.c1 < 0.5 * first.c1) rep.c1_pass = false;
        if (!std::isfinite(d.c2) || d.c2 > margin * std::max(first.c2, floor)) rep.c2_pass = false;
        if (!std::isfinite(d.c3) || d.c3 > margin * std::max(first.c3, floor)) rep.c3_pass = false;
        if (!std::isfinite(d.c4) || d.c4 > margin * std::max(first.c4, floor)) rep.c4_pass = false;
    }
    return rep;
}

BreakdownFlag detect_breakdown(const Solution& solution, const ProblemSpec& spec,
                               const BreakdownThresholds& thresholds) {
    BreakdownFlag flag;
    const auto levels = solution_levels(solution);
    if (levels.empty()) return flag;

    const double initial_inf = weighted_inf(*levels.front().u, spec.alpha);
    const double floor = thresholds.degeneracy_floor_fraction * initial_inf;

    for (const LevelView& lv : levels) {
        if (lv.jac_min <= 0.0) {
            flag.kind = BreakdownKind::characteristic_crossing;
            flag.time = lv.t;
            flag.witness_value = lv.jac_min;
            return flag;
        }
        double winf = std::numeric_limits<double>::infinity();
        double winf_x = 0.0;
        for (std::size_t i = 0; i < lv.u->size(); ++i) {
            const double w = std::pow(bracket_weight(lv.u->grid().node(i)), spec.alpha) *
                             lv.u->value(i);
            if (w < winf) {
                winf = w;
                winf_x = lv.u->grid().node(i);
            }
        }
        if (winf < floor) {
            flag.kind = BreakdownKind::degeneracy;
            flag.time = lv.t;
            flag.witness_x = winf_x;
            flag.witness_value = winf;
            return flag;
        }
        auto [ut, ux] = recover_gradients(*lv.u, *lv.R, *lv.S, spec);
        const double grad = weighted_sup(ut, spec.beta) + weighted_sup(ux, spec.beta);
        if (grad > thresholds.blowup_cap) {
            flag.kind = BreakdownKind::blowup;
            flag.time = lv.t;
            flag.witness_value = grad;
            return flag;
        }
    }
    return flag;
}

SignPreservationReport sign_preservation_check(const Solution& solution,
                                               const ProblemSpec& spec) {
    if (!spec.flux_F.is_zero())
        throw std::invalid_argument("sign_preservation_check: claim requires F == 0");
    SignPreservationReport rep;
    rep.min_R = std::numeric_limits<double>::infinity();
    rep.min_S = std::numeric_limits<double>::infinity();
    const auto levels = solution_levels(solution);
    for (const LevelView& lv : levels) {
        rep.min_R = std::min(rep.min_R, lv.R->min_value());
        rep.min_S = std::min(rep.min_S, lv.S->min_value());
    }
    if (!levels.empty())
        rep.initial_nonnegative =
            levels.front().R->min_value() >= 0.0 && levels.front().S->min_value() >= 0.0;
    rep.preserved = rep.initial_nonnegative && rep.min_R >= -1e-8 && rep.min_S >= -1e-8;
    return rep;
}

ConservationReport conservation_form_residual(const Solution& solution, const ProblemSpec& spec) {
    if (!(spec.flux_F.kind == FluxSpec::Kind::zero || spec.flux_F.kind == FluxSpec::Kind::power))
        throw std::invalid_argument(
            "conservation_form_residual: no closed-form primitive for a general flux");
    const auto G = [&](double u) {
        if (spec.flux_F.is_zero()) return 0.0;
        return spec.flux_F.lambda * std::pow(u, spec.flux_F.b + 1.0) / (spec.flux_F.b + 1.0);
    };
    // σ'(u) = u^{2a} so the pair (u_t = v_x, v_t = σ(u)_x + G(u)) matches the
    // wave equation; equals u^{a+1}/(a+1) at a = 0.
    const auto sigma = [&](double u) {
        const double c = spec.speed_coefficient(u);
        return c * c * u / (2.0 * spec.exponent_a + 1.0);
    };

    ConservationReport rep;
    for (const SlabState& st : solution.slabs) {
        const std::size_t m = st.slab.m;
        const std::size_t n = st.grid.size();
        const double h = st.grid.spacing();
        const double dt = st.slab.dt;

        // v(t, x) = ∫ u_t dy by cumulative trapezoid per level
        std::vector<std::vector<double>> v(m, std::vector<double>(n, 0.0));
        std::vector<std::vector<double>> ut(m, std::vector<double>(n));
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i)
                ut[j][i] = 0.5 * (st.R[j].value(i) + st.S[j].value(i));
            for (std::size_t i = 1; i < n; ++i)
                v[j][i] = v[j][i - 1] + 0.5 * h * (ut[j][i - 1] + ut[j][i]);
        }

        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double vx = (v[j][i + 1] - v[j][i - 1]) / (2.0 * h);
                rep.sup_ut_minus_vx = std::max(rep.sup_ut_minus_vx, std::abs(ut[j][i] - vx));
            }

        for (std::size_t j = 1; j + 1 < m; ++j)
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double vt = (v[j + 1][i] - v[j - 1][i]) / (2.0 * dt);
                const double dsigma =
                    (sigma(st.u[j].value(i + 1)) - sigma(st.u[j].value(i - 1))) / (2.0 * h);
                const double resid = vt - dsigma - G(st.u[j].value(i));
                rep.sup_momentum_residual = std::max(rep.sup_momentum_residual, std::abs(resid));
            }
    }
    return rep;
}

JacobianBoundReport jacobian_bound_check(const SlabState& slab, const ProblemSpec& spec) {
    JacobianBoundReport rep;
    double C = 0.0;
    for (std::size_t j = 0; j < slab.slab.m; ++j) {
        C = std::max(C, slab.rate_max[j]);
        auto [ut, ux] = recover_gradients(slab.u[j], slab.R[j], slab.S[j], spec);
        for (std::size_t i = 0; i < slab.grid.size(); ++i) {
            const double u = slab.u[j].value(i);
            C = std::max(C, std::abs(spec.speed_coefficient_deriv(u) * ux.value(i)));
        }
    }
    rep.measured_C = C;
    rep.min_jacobian = 1.0;
    rep.passed = true;
    for (std::size_t j = 0; j < slab.slab.m; ++j) {
        rep.min_jacobian = std::min(rep.min_jacobian, slab.jac_min[j]);
        const double span = slab.slab.time(j) - slab.slab.t0;
        const double bound = std::exp(C * span);
        rep.worst_margin = std::max(rep.worst_margin, slab.jac_max[j] / bound);
        if (!(slab.jac_min[j] > 0.0) || slab.jac_max[j] > bound) rep.passed = false;
    }
    return rep;
}

}  // namespace qwave

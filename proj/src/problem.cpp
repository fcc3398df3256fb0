#include "qwave/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qwave {

FluxSpec FluxSpec::power(double lambda, double b) {
    FluxSpec f;
    f.kind = Kind::power;
    f.lambda = lambda;
    f.b = b;
    return f;
}

FluxSpec FluxSpec::general(const Expr& e) {
    FluxSpec f;
    f.kind = Kind::general;
    f.expr = e;
    f.expr_prime = e.derivative();
    return f;
}

double FluxSpec::value(double theta) const {
    switch (kind) {
        case Kind::zero: return 0.0;
        case Kind::power: return lambda * std::pow(theta, b);
        case Kind::general: return expr.eval(theta);
    }
    return 0.0;
}

double FluxSpec::deriv(double theta) const {
    switch (kind) {
        case Kind::zero: return 0.0;
        case Kind::power: return lambda * b * std::pow(theta, b - 1.0);
        case Kind::general: return expr_prime.eval(theta);
    }
    return 0.0;
}

double ProblemSpec::speed_coefficient(double u) const {
    if (coefficient_mode == CoefficientMode::general) return c_expr.eval(u);
    const double a = exponent_a;
    if (a == 0.0) return 1.0;
    if (a == 1.0) return u;
    if (a == 2.0) return u * u;
    if (a == 0.5) return std::sqrt(u);
    return std::pow(u, a);
}

double ProblemSpec::speed_coefficient_deriv(double u) const {
    if (coefficient_mode == CoefficientMode::general) return c_prime.eval(u);
    const double a = exponent_a;
    if (a == 0.0) return 0.0;
    if (a == 1.0) return 1.0;
    if (a == 2.0) return 2.0 * u;
    return a * std::pow(u, a - 1.0);
}

void set_general_coefficient(ProblemSpec& spec, const Expr& c) {
    spec.coefficient_mode = CoefficientMode::general;
    spec.c_expr = c;
    spec.c_prime = c.derivative();
    spec.c_second = spec.c_prime.derivative();
}

double derive_gamma(double a, double alpha) {
    if (a < 0.0 || alpha < 0.0)
        throw std::invalid_argument("derive_gamma: a and alpha must be nonnegative");
    return a >= 1.0 ? 0.0 : (1.0 - a) * alpha;
}

AssumptionReport validate_assumptions(const ProblemSpec& spec, const Grid1D& probe_grid) {
    AssumptionReport rep;
    const double a = spec.exponent_a;

    // Exponent admissibility; the regime-redundant inequality is skipped.
    if (a <= 1.0 && !(spec.alpha <= spec.beta))
        rep.violations.push_back({"(ab1)", 0.0, spec.alpha - spec.beta});
    if (a >= 1.0 && !(a * spec.alpha <= spec.beta))
        rep.violations.push_back({"(ab2)", 0.0, a * spec.alpha - spec.beta});

    const Expr u0p = spec.u0_expr.derivative();
    const Expr u1p = spec.u1_expr.derivative();

    // R0/S0 and their derivatives as expressions, so c4 sees no FD noise.
    const Expr speed0 = spec.coefficient_mode == CoefficientMode::general
                            ? spec.c_expr.substitute(spec.u0_expr)
                            : pow(spec.u0_expr, Expr::constant(a));
    const Expr plus = spec.u1_expr + speed0 * u0p;
    const Expr minus = spec.u1_expr - speed0 * u0p;
    const Expr plus_d = plus.derivative();
    const Expr minus_d = minus.derivative();

    double c1 = std::numeric_limits<double>::infinity();
    double c2 = 0.0, c3 = 0.0, c4 = 0.0, B1 = 0.0;
    bool nonpositive_seen = false, nonfinite_seen = false;
    double worst_pos_x = 0.0, worst_pos = std::numeric_limits<double>::infinity();
    double worst_nf_x = 0.0;

    for (std::size_t i = 0; i < probe_grid.size(); ++i) {
        const double x = probe_grid.node(i);
        const double u0 = spec.u0_expr.eval(x);
        const double du0 = u0p.eval(x);
        const double u1 = spec.u1_expr.eval(x);
        const double du1 = u1p.eval(x);
        const double rp = plus.eval(x), rm = minus.eval(x);
        const double dp = plus_d.eval(x), dm = minus_d.eval(x);

        const bool finite = std::isfinite(u0) && std::isfinite(du0) && std::isfinite(u1) &&
                            std::isfinite(du1) && std::isfinite(rp) && std::isfinite(rm) &&
                            std::isfinite(dp) && std::isfinite(dm);
        if (!finite) {
            if (!nonfinite_seen) worst_nf_x = x;
            nonfinite_seen = true;
            continue;
        }
        if (!(u0 > 0.0)) {
            if (u0 < worst_pos) {
                worst_pos = u0;
                worst_pos_x = x;
            }
            nonpositive_seen = true;
            continue;
        }
        const double w = bracket_weight(x);
        c1 = std::min(c1, std::pow(w, spec.alpha) * u0);
        c2 = std::max(c2, u0);
        const double wb = std::pow(w, spec.beta);
        c3 = std::max({c3, wb * std::abs(rp), wb * std::abs(rm)});
        const double wg = std::pow(w, spec.gamma);
        c4 = std::max({c4, wg * std::abs(dp), wg * std::abs(dm)});
        B1 = std::max(B1, wb * spec.speed_coefficient(u0) * std::abs(du0));
    }

    if (nonfinite_seen) rep.violations.push_back({"non-finite", worst_nf_x, 0.0});
    if (nonpositive_seen) rep.violations.push_back({"positivity", worst_pos_x, worst_pos});
    if (!std::isfinite(B1)) rep.violations.push_back({"non-finite", 0.0, B1});

    rep.measured_c1 = std::isfinite(c1) ? c1 : 0.0;
    rep.measured_c2 = c2;
    rep.measured_c3 = c3;
    rep.measured_c4 = c4;
    rep.measured_B1 = B1;
    rep.passed = rep.violations.empty();
    return rep;
}

namespace {

struct RatioScan {
    double sup = 0.0;
    bool capped = false;
    bool growing = false;  // monotone growth through the last decade toward θ→0
};

// samples run from θ = ε up to K; "last decade" is θ ≤ 10ε.
RatioScan scan_ratios(const std::vector<double>& thetas, const std::vector<double>& ratios,
                      double cap) {
    RatioScan out;
    for (double r : ratios) {
        out.sup = std::max(out.sup, r);
        if (r > cap) out.capped = true;
    }
    const double decade_top = thetas.front() * 10.0;
    bool strictly_growing = true;
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < thetas.size() && thetas[i + 1] <= decade_top; ++i) {
        ++count;
        if (!(ratios[i] > ratios[i + 1])) strictly_growing = false;
    }
    out.growing = strictly_growing && count >= 3;
    return out;
}

}  // namespace

LeviReport check_levi(const ProblemSpec& spec, std::size_t n_samples, double cap) {
    if (!(spec.K_bound > 0.0)) throw std::invalid_argument("check_levi: K_bound must be positive");
    if (n_samples < 2) throw std::invalid_argument("check_levi: need at least 2 samples");

    LeviReport rep;
    const double K = spec.K_bound;
    const double eps = K * 1e-8;
    const double a = spec.exponent_a;

    std::vector<double> thetas(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i + 1) / static_cast<double>(n_samples);
        thetas[i] = eps * std::pow(K / eps, t);  // log-spaced in (ε, K]
    }

    std::vector<double> rF(n_samples), rFp(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double th = thetas[i];
        const double f = spec.flux_F.value(th);
        const double fp = spec.flux_F.deriv(th);
        if (!std::isfinite(f) || !std::isfinite(fp))
            throw std::runtime_error("flux not C1 on (0,K]: non-finite value at theta = " +
                                     std::to_string(th));
        rF[i] = std::abs(f) / std::pow(th, a);
        rFp[i] = std::abs(fp) / std::pow(th, a - 1.0);
    }

    const RatioScan sF = scan_ratios(thetas, rF, cap);
    const RatioScan sFp = scan_ratios(thetas, rFp, cap);
    rep.measured_C_K = sF.sup;
    rep.measured_C_K_prime = sFp.sup;
    rep.measured_C_all = std::max(sF.sup, sFp.sup);
    if (sF.capped || sF.growing) rep.violations.push_back("(f-con)");
    if (sFp.capped || sFp.growing) rep.violations.push_back("(f-con2)");

    if (spec.coefficient_mode == CoefficientMode::general) {
        std::vector<double> r1(n_samples), r1low(n_samples), r2(n_samples), r3(n_samples);
        for (std::size_t i = 0; i < n_samples; ++i) {
            const double th = thetas[i];
            const double c = spec.c_expr.eval(th);
            const double cp = spec.c_prime.eval(th);
            const double cpp = spec.c_second.eval(th);
            if (!std::isfinite(c) || !std::isfinite(cp) || !std::isfinite(cpp))
                throw std::runtime_error("coefficient not C2 on (0,K]: non-finite value at theta = " +
                                         std::to_string(th));
            r1[i] = c;                                     // ≤ C_{2,K}
            r1low[i] = c / std::pow(th, a);                // ≥ C_{1,K} > 0
            r2[i] = std::abs(cp) / std::pow(th, a - 1.0);  // ≤ C_{3,K}
            r3[i] = std::abs(cpp) / std::pow(th, a - 2.0); // ≤ C_{4,K}
        }
        const RatioScan s1 = scan_ratios(thetas, r1, cap);
        const RatioScan s2 = scan_ratios(thetas, r2, cap);
        const RatioScan s3 = scan_ratios(thetas, r3, cap);
        const double lower = *std::min_element(r1low.begin(), r1low.end());
        if (s1.capped || s1.growing || !(lower > 0.0)) rep.violations.push_back("(c-con1)");
        if (s2.capped || s2.growing) rep.violations.push_back("(c-con2)");
        if (s3.capped || s3.growing) rep.violations.push_back("(c-con3)");
        rep.measured_C_all = std::max({rep.measured_C_all, s1.sup, s2.sup, s3.sup});
    }

    rep.passed = rep.violations.empty();
    return rep;
}

std::pair<ScalarField1D, ScalarField1D> initial_invariants(const ProblemSpec& spec,
                                                           const Grid1D& grid, InterpMode mode) {
    InitialFields f = initial_fields(spec, grid, mode);
    return {f.R0, f.S0};
}

InitialFields initial_fields(const ProblemSpec& spec, const Grid1D& grid, InterpMode mode) {
    const Expr u0p = spec.u0_expr.derivative();
    Expr speed0;
    if (spec.coefficient_mode == CoefficientMode::general) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (spec.u0_expr.eval(grid.node(i)) == 0.0)
                throw std::runtime_error("degenerate node: u0 = 0 at x = " +
                                         std::to_string(grid.node(i)));
        speed0 = spec.c_expr.substitute(spec.u0_expr);
    } else {
        speed0 = pow(spec.u0_expr, Expr::constant(spec.exponent_a));
    }
    const Expr r0 = spec.u1_expr + speed0 * u0p;
    const Expr s0 = spec.u1_expr - speed0 * u0p;

    const InterpMode dmode = data_interp(mode);
    InitialFields out{sample_expression(spec.u0_expr, grid, mode),
                      sample_expression(r0, grid, dmode),
                      sample_expression(s0, grid, dmode),
                      sample_expression(r0.derivative(), grid, dmode),
                      sample_expression(s0.derivative(), grid, dmode)};
    return out;
}

}  // namespace qwave

#include "qwave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace qwave {

SourceTerms evaluate_sources(double u, double R, double S, const ProblemSpec& spec) {
    if (!(u > 0.0)) throw DegenerateStateError(0.0, 0.0, u);
    double g, coef;
    if (spec.coefficient_mode == CoefficientMode::general) {
        coef = spec.c_expr.eval(u);
        g = spec.c_prime.eval(u) / (2.0 * coef);
    } else {
        coef = spec.speed_coefficient(u);
        g = spec.exponent_a / (2.0 * u);
    }
    SourceTerms out;
    out.N1 = g * (R * R - R * S);
    out.N2 = g * (S * S - R * S);
    out.L = spec.flux_F.is_zero() ? 0.0 : spec.flux_F.value(u) * (R - S) / (2.0 * coef);
    return out;
}

SourcePartials evaluate_source_partials(double u, double R, double S, const ProblemSpec& spec) {
    if (!(u > 0.0)) throw DegenerateStateError(0.0, 0.0, u);
    double g, gp, coef, coef_p;
    if (spec.coefficient_mode == CoefficientMode::general) {
        coef = spec.c_expr.eval(u);
        coef_p = spec.c_prime.eval(u);
        g = coef_p / (2.0 * coef);
        gp = spec.c_second.eval(u) / (2.0 * coef) - 2.0 * g * g;
    } else {
        coef = spec.speed_coefficient(u);
        coef_p = spec.speed_coefficient_deriv(u);
        g = spec.exponent_a / (2.0 * u);
        gp = -g / u;
    }
    SourcePartials p;
    p.N1u = gp * (R * R - R * S);
    p.N1R = g * (2.0 * R - S);
    p.N1S = -g * R;
    p.N2u = gp * (S * S - R * S);
    p.N2R = -g * S;
    p.N2S = g * (2.0 * S - R);
    if (spec.flux_F.is_zero()) {
        p.Lu = p.LR = p.LS = 0.0;
    } else {
        const double F = spec.flux_F.value(u);
        const double Fp = spec.flux_F.deriv(u);
        p.Lu = Fp * (R - S) / (2.0 * coef) - F * (R - S) * coef_p / (2.0 * coef * coef);
        p.LR = F / (2.0 * coef);
        p.LS = -p.LR;
    }
    return p;
}

namespace {

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    std::size_t n_threads = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    n_threads = std::min<std::size_t>(n_threads, n);
    if (n_threads <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + n_threads - 1) / n_threads;
    for (std::size_t t = 1; t < n_threads; ++t) {
        const std::size_t lo = t * chunk;
        if (lo >= n) break;
        pool.emplace_back(body, lo, std::min(n, lo + chunk));
    }
    body(0, std::min(n, chunk));
    for (auto& th : pool) th.join();
}

// Evaluates the input state's fields time-blended between two stored levels,
// sharing the cell lookup across fields. All positions clamp to the grid.
struct StateSampler {
    const SlabState* st;
    const ProblemSpec* spec;

    struct Pos {
        std::size_t cell;
        double tloc;
    };

    Pos locate(double x) const {
        const Grid1D& g = st->grid;
        const double xc = g.clamp(x);
        const std::size_t k = g.cell_index(xc);
        return {k, (xc - g.node(k)) / g.spacing()};
    }

    static double blend(const std::vector<ScalarField1D>& f, std::size_t lev, double th,
                        const Pos& p) {
        const double lo = f[lev].eval_in_cell(p.cell, p.tloc);
        if (th == 0.0) return lo;
        return (1.0 - th) * lo + th * f[lev + 1].eval_in_cell(p.cell, p.tloc);
    }

    double positive_v(std::size_t lev, double th, const Pos& p, double s, double x) const {
        const double v = blend(st->u, lev, th, p);
        if (!(v > 0.0)) throw DegenerateStateError(s, x, v);
        return v;
    }

    // characteristic speed v^a (or c(v)) at time level lev + th
    double speed(std::size_t lev, double th, double x, double s) const {
        const Pos p = locate(x);
        return spec->speed_coefficient(positive_v(lev, th, p, s, x));
    }

    // ∂x of the speed: a (R̄−S̄)/(2v), general mode c'(v)(R̄−S̄)/(2c(v))
    double speed_slope(std::size_t lev, double th, double x, double s) const {
        const Pos p = locate(x);
        const double v = positive_v(lev, th, p, s, x);
        const double dRS = blend(st->R, lev, th, p) - blend(st->S, lev, th, p);
        if (spec->coefficient_mode == CoefficientMode::general)
            return spec->c_prime.eval(v) * dRS / (2.0 * spec->c_expr.eval(v));
        return spec->exponent_a * dRS / (2.0 * v);
    }

    struct Sample {
        double v, Rb, Sb, Vb, Wb, vx;
    };

    Sample sample_level(std::size_t lev, double x, double s) const {
        const Pos p = locate(x);
        Sample smp;
        smp.v = st->u[lev].eval_in_cell(p.cell, p.tloc);
        if (!(smp.v > 0.0)) throw DegenerateStateError(s, x, smp.v);
        smp.Rb = st->R[lev].eval_in_cell(p.cell, p.tloc);
        smp.Sb = st->S[lev].eval_in_cell(p.cell, p.tloc);
        smp.Vb = st->V[lev].eval_in_cell(p.cell, p.tloc);
        smp.Wb = st->W[lev].eval_in_cell(p.cell, p.tloc);
        smp.vx = (smp.Rb - smp.Sb) / (2.0 * spec->speed_coefficient(smp.v));
        return smp;
    }
};

struct PathAccum {
    double value_tail = 0.0;  // ∫ (N + L)
    double deriv_tail = 0.0;  // ∫ ∂ₓx± · (chain rule of N + L)
    double foot = 0.0;
    double foot_jac = 1.0;
    double jac_min = 1.0, jac_max = 1.0;
    double rate_max = 0.0;
};

// Backward trace of one family from (t_j, node i) to the slab start, with the
// variational equation integrated jointly and both trapezoid sums accumulated
// at the stored levels the path crosses.
PathAccum walk_family(const StateSampler& smp, int sign, std::size_t j, double x_start,
                      const Slab& slab) {
    const double sgn = static_cast<double>(sign);
    const double dt = slab.dt;
    const Grid1D& grid = smp.st->grid;

    PathAccum acc;
    double x = x_start;
    double J = 1.0;

    auto integrands = [&](std::size_t lev, double xx, double jac, double& g, double& d) {
        const double s = slab.time(lev);
        const StateSampler::Sample q = smp.sample_level(lev, xx, s);
        const SourceTerms src = evaluate_sources(q.v, q.Rb, q.Sb, *smp.spec);
        const SourcePartials p = evaluate_source_partials(q.v, q.Rb, q.Sb, *smp.spec);
        if (sign < 0) {
            g = src.N1 + src.L;
            d = jac * ((p.N1u + p.Lu) * q.vx + (p.N1R + p.LR) * q.Vb + (p.N1S + p.LS) * q.Wb);
        } else {
            g = src.N2 + src.L;
            d = jac * ((p.N2u + p.Lu) * q.vx + (p.N2R + p.LR) * q.Vb + (p.N2S + p.LS) * q.Wb);
        }
    };

    double g_prev, d_prev;
    integrands(j, x, J, g_prev, d_prev);
    acc.rate_max = std::abs(smp.speed_slope(j - 1, 1.0, x, slab.time(j)));

    for (std::size_t k = j; k >= 1; --k) {
        const std::size_t lev = k - 1;  // stepping from level k down to level lev
        const double s_hi = slab.time(k);
        const double h = -dt;
        const double r1 = smp.speed_slope(lev, 1.0, x, s_hi);
        const double k1x = sgn * smp.speed(lev, 1.0, x, s_hi);
        const double k1J = sgn * r1 * J;
        const double x2 = x + 0.5 * h * k1x;
        const double rm2 = smp.speed_slope(lev, 0.5, x2, s_hi - 0.5 * dt);
        const double k2x = sgn * smp.speed(lev, 0.5, x2, s_hi - 0.5 * dt);
        const double k2J = sgn * rm2 * (J + 0.5 * h * k1J);
        const double x3 = x + 0.5 * h * k2x;
        const double rm3 = smp.speed_slope(lev, 0.5, x3, s_hi - 0.5 * dt);
        const double k3x = sgn * smp.speed(lev, 0.5, x3, s_hi - 0.5 * dt);
        const double k3J = sgn * rm3 * (J + 0.5 * h * k2J);
        const double x4 = x + h * k3x;
        const double r4 = smp.speed_slope(lev, 0.0, x4, slab.time(lev));
        const double k4x = sgn * smp.speed(lev, 0.0, x4, slab.time(lev));
        const double k4J = sgn * r4 * (J + h * k3J);

        x = grid.clamp(x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x));
        J += h / 6.0 * (k1J + 2.0 * k2J + 2.0 * k3J + k4J);

        acc.jac_min = std::min(acc.jac_min, J);
        acc.jac_max = std::max(acc.jac_max, J);
        acc.rate_max = std::max({acc.rate_max, std::abs(r1), std::abs(rm2), std::abs(rm3),
                                 std::abs(r4)});

        double g_new, d_new;
        integrands(lev, x, J, g_new, d_new);
        acc.value_tail += 0.5 * dt * (g_prev + g_new);
        acc.deriv_tail += 0.5 * dt * (d_prev + d_new);
        g_prev = g_new;
        d_prev = d_new;
    }
    acc.foot = x;
    acc.foot_jac = J;
    return acc;
}

SlabState picard_sweep(const SlabState& in, const ProblemSpec& spec) {
    const Slab& slab = in.slab;
    const Grid1D& grid = in.grid;
    const std::size_t m = slab.m;
    const std::size_t n = grid.size();
    const InterpMode u_mode = in.u[0].mode();
    const InterpMode d_mode = in.R[0].mode();

    const StateSampler sampler{&in, &spec};

    std::vector<std::vector<double>> Rn(m), Sn(m), Vn(m), Wn(m);
    for (std::size_t j = 1; j < m; ++j) {
        Rn[j].resize(n);
        Sn[j].resize(n);
        Vn[j].resize(n);
        Wn[j].resize(n);
    }
    std::vector<std::vector<double>> jmin(m, std::vector<double>()), jmax(m), rmax(m);
    for (std::size_t j = 1; j < m; ++j) {
        jmin[j].assign(n, 1.0);
        jmax[j].assign(n, 1.0);
        rmax[j].assign(n, 0.0);
    }

    std::exception_ptr failure = nullptr;
    std::mutex failure_mutex;

    parallel_for(n, [&](std::size_t i0, std::size_t i1) {
        try {
            for (std::size_t i = i0; i < i1; ++i) {
                const double xi = grid.node(i);
                for (std::size_t j = 1; j < m; ++j) {
                    const PathAccum mn = walk_family(sampler, -1, j, xi, slab);
                    const PathAccum pl = walk_family(sampler, +1, j, xi, slab);
                    Rn[j][i] = in.R[0].interpolate_clamped(mn.foot) + mn.value_tail;
                    Vn[j][i] = in.V[0].interpolate_clamped(mn.foot) * mn.foot_jac + mn.deriv_tail;
                    Sn[j][i] = in.S[0].interpolate_clamped(pl.foot) + pl.value_tail;
                    Wn[j][i] = in.W[0].interpolate_clamped(pl.foot) * pl.foot_jac + pl.deriv_tail;
                    jmin[j][i] = std::min(mn.jac_min, pl.jac_min);
                    jmax[j][i] = std::max(mn.jac_max, pl.jac_max);
                    rmax[j][i] = std::max(mn.rate_max, pl.rate_max);
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);

    SlabState out;
    out.slab = slab;
    out.grid = grid;
    out.u.reserve(m);
    out.R.reserve(m);
    out.S.reserve(m);
    out.V.reserve(m);
    out.W.reserve(m);
    out.u.push_back(in.u[0]);
    out.R.push_back(in.R[0]);
    out.S.push_back(in.S[0]);
    out.V.push_back(in.V[0]);
    out.W.push_back(in.W[0]);

    // u(t_j) = u0 + composite trapezoid of (R+S)/2 over levels
    std::vector<double> ucum(n);
    for (std::size_t i = 0; i < n; ++i) ucum[i] = in.u[0].value(i);
    std::vector<double> w_prev(n);
    for (std::size_t i = 0; i < n; ++i) w_prev[i] = 0.5 * (in.R[0].value(i) + in.S[0].value(i));

    for (std::size_t j = 1; j < m; ++j) {
        std::vector<double> uj(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = 0.5 * (Rn[j][i] + Sn[j][i]);
            ucum[i] += 0.5 * slab.dt * (w_prev[i] + w);
            w_prev[i] = w;
            uj[i] = ucum[i];
        }
        out.u.emplace_back(grid, std::move(uj), u_mode);
        out.R.emplace_back(grid, std::move(Rn[j]), d_mode);
        out.S.emplace_back(grid, std::move(Sn[j]), d_mode);
        out.V.emplace_back(grid, std::move(Vn[j]), d_mode);
        out.W.emplace_back(grid, std::move(Wn[j]), d_mode);
    }

    out.jac_min.assign(m, 1.0);
    out.jac_max.assign(m, 1.0);
    out.rate_max.assign(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        out.rate_max[0] = std::max(out.rate_max[0],
                                   std::abs(sampler.speed_slope(0, 0.0, grid.node(i), slab.t0)));
    for (std::size_t j = 1; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            out.jac_min[j] = std::min(out.jac_min[j], jmin[j][i]);
            out.jac_max[j] = std::max(out.jac_max[j], jmax[j][i]);
            out.rate_max[j] = std::max(out.rate_max[j], rmax[j][i]);
        }
    }
    return out;
}

}  // namespace

SlabState make_initial_state(const SlabInitial& initial, const Slab& slab, const Grid1D& grid) {
    SlabState st;
    st.slab = slab;
    st.grid = grid;
    st.u.assign(slab.m, initial.u0);
    st.R.assign(slab.m, initial.R0);
    st.S.assign(slab.m, initial.S0);
    st.V.assign(slab.m, initial.V0);
    st.W.assign(slab.m, initial.W0);
    st.jac_min.assign(slab.m, 1.0);
    st.jac_max.assign(slab.m, 1.0);
    st.rate_max.assign(slab.m, 0.0);
    return st;
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

double StateSpeed::speed(double t, double x) const {
    const Slab& slab = state_->slab;
    const double tau = std::clamp(t, slab.t0, slab.t1());
    double pos = (tau - slab.t0) / slab.dt;
    std::size_t lev = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), slab.m - 2);
    const double th = std::clamp(pos - static_cast<double>(lev), 0.0, 1.0);
    const StateSampler smp{state_, spec_};
    return smp.speed(lev, th, x, t);
}

double StateSpeed::speed_x(double t, double x) const {
    const Slab& slab = state_->slab;
    const double tau = std::clamp(t, slab.t0, slab.t1());
    double pos = (tau - slab.t0) / slab.dt;
    std::size_t lev = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), slab.m - 2);
    const double th = std::clamp(pos - static_cast<double>(lev), 0.0, 1.0);
    const StateSampler smp{state_, spec_};
    return smp.speed_slope(lev, th, x, t);
}

SlabState apply_phi(const SlabState& input, const ProblemSpec& spec) {
    return picard_sweep(input, spec);
}

std::pair<std::vector<ScalarField1D>, std::vector<ScalarField1D>> update_derivatives(
    const SlabState& input, const ProblemSpec& spec) {
    SlabState out = picard_sweep(input, spec);
    return {std::move(out.V), std::move(out.W)};
}

double sup_distance(const SlabState& a, const SlabState& b) {
    auto group = [](const std::vector<ScalarField1D>& f, const std::vector<ScalarField1D>& g) {
        double s = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j)
            for (std::size_t i = 0; i < f[j].size(); ++i)
                s = std::max(s, std::abs(f[j].value(i) - g[j].value(i)));
        return s;
    };
    return group(a.u, b.u) + group(a.R, b.R) + group(a.S, b.S);
}

SlabResult solve_slab(const ProblemSpec& spec, const SlabInitial& initial, const Slab& slab,
                      const Grid1D& grid, double tol, std::size_t max_iter,
                      double degeneracy_floor_abs) {
    SlabResult res;
    res.state = make_initial_state(initial, slab, grid);
    if (res.state.u[0].min_value() <= degeneracy_floor_abs) {
        res.signal = SlabSignal::degeneracy;
        return res;
    }

    std::size_t rising = 0;
    for (std::size_t k = 1; k <= max_iter; ++k) {
        SlabState next;
        try {
            next = picard_sweep(res.state, spec);
        } catch (const DegenerateStateError&) {
            res.signal = SlabSignal::degeneracy;
            return res;
        }
        double umin = std::numeric_limits<double>::infinity();
        bool finite = true;
        for (const auto& f : next.u) {
            umin = std::min(umin, f.min_value());
            for (double v : f.values())
                if (!std::isfinite(v)) finite = false;
        }
        if (!finite || umin <= degeneracy_floor_abs) {
            res.signal = SlabSignal::degeneracy;
            return res;
        }

        const double d = sup_distance(next, res.state);
        res.state = std::move(next);
        res.stats.distances.push_back(d);
        res.stats.iterations = k;
        if (d <= tol) {
            res.stats.converged = true;
            break;
        }
        const auto& ds = res.stats.distances;
        rising = (ds.size() >= 2 && d >= ds[ds.size() - 2]) ? rising + 1 : 0;
        if (rising >= 3) break;  // contraction failure; caller shrinks the slab
    }

    std::vector<double> ratios;
    for (std::size_t k = 1; k < res.stats.distances.size(); ++k)
        if (res.stats.distances[k - 1] > 0.0)
            ratios.push_back(res.stats.distances[k] / res.stats.distances[k - 1]);
    res.stats.factor = median(std::move(ratios));
    return res;
}

double slab_length_policy(const ProblemSpec& spec, const Grid1D& grid) {
    const Expr u0p = spec.u0_expr.derivative();
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u0 = spec.u0_expr.eval(grid.node(i));
        const double du0 = u0p.eval(grid.node(i));
        sup = std::max(sup, std::abs(spec.speed_coefficient_deriv(u0) *
                                     spec.speed_coefficient(u0) * du0));
    }
    const LeviReport levi = check_levi(spec, 200);
    return std::min(0.1, 0.5 / (1.0 + sup + levi.measured_C_all));
}

Solution continue_solution(const ProblemSpec& spec, const Grid1D& grid,
                           const SolverOptions& options) {
    Solution sol;
    const InitialFields f0 = initial_fields(spec, grid, options.interpolation);
    SlabInitial init{f0.u0, f0.R0, f0.S0, f0.V0, f0.W0};

    const double inf0 = weighted_inf(f0.u0, spec.alpha);
    const double degeneracy_floor = options.degeneracy_floor_fraction * inf0;
    const double edge = std::max(std::abs(grid.x_min), std::abs(grid.x_max));
    const double hard_floor =
        1e-3 * inf0 * std::pow(bracket_weight(edge), -spec.alpha);

    double len = options.initial_slab_length ? *options.initial_slab_length
                                             : slab_length_policy(spec, grid);
    len = std::min(len, options.T_target);
    std::size_t m = std::max<std::size_t>(2, options.levels_per_slab);
    const double dt = len / static_cast<double>(m - 1);

    double t_cur = 0.0;
    const double t_eps = 1e-12 * std::max(1.0, options.T_target);
    while (t_cur < options.T_target - t_eps) {
        const double remaining = options.T_target - t_cur;
        Slab slab;
        slab.t0 = t_cur;
        if (remaining < len - t_eps) {
            slab.m = std::max<std::size_t>(
                2, static_cast<std::size_t>(std::ceil(remaining / dt - 1e-9)) + 1);
            slab.dt = remaining / static_cast<double>(slab.m - 1);
        } else {
            slab.m = m;
            slab.dt = dt;
        }

        SlabResult res = solve_slab(spec, init, slab, grid, options.tol, options.max_iter,
                                    hard_floor);
        if (res.signal == SlabSignal::degeneracy) {
            sol.stats.push_back(res.stats);
            sol.termination = Termination::breakdown_degeneracy;
            return sol;
        }
        if (!res.stats.converged) {
            const std::size_t m_new = (m - 1) / 2 + 1;
            if (m_new < 5) {  // slab floor 4·dt
                sol.stats.push_back(res.stats);
                sol.termination = Termination::contraction_failure;
                return sol;
            }
            m = m_new;
            len = dt * static_cast<double>(m - 1);
            continue;
        }

        sol.slabs.push_back(res.state);
        sol.stats.push_back(res.stats);
        t_cur = slab.t1();
        sol.reached_T = t_cur;

        const SlabState& st = sol.slabs.back();
        for (std::size_t j = 0; j < slab.m; ++j) {
            if (weighted_inf(st.u[j], spec.alpha) < degeneracy_floor) {
                sol.termination = Termination::breakdown_degeneracy;
                return sol;
            }
            auto [ut, ux] = recover_gradients(st.u[j], st.R[j], st.S[j], spec);
            if (weighted_sup(ut, spec.beta) + weighted_sup(ux, spec.beta) > options.blowup_cap ||
                st.jac_min[j] <= 0.0) {
                sol.termination = Termination::breakdown_blowup;
                return sol;
            }
        }

        const std::size_t last = slab.m - 1;
        init = SlabInitial{st.u[last], st.R[last], st.S[last], st.V[last], st.W[last]};
    }
    sol.termination = Termination::reached_target_T;
    return sol;
}

std::pair<ScalarField1D, ScalarField1D> recover_gradients(const ScalarField1D& u,
                                                          const ScalarField1D& R,
                                                          const ScalarField1D& S,
                                                          const ProblemSpec& spec) {
    const std::size_t n = u.size();
    std::vector<double> ut(n), ux(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double uv = u.value(i);
        if (!(uv > 0.0)) throw DegenerateStateError(0.0, u.grid().node(i), uv);
        ut[i] = 0.5 * (R.value(i) + S.value(i));
        ux[i] = (R.value(i) - S.value(i)) / (2.0 * spec.speed_coefficient(uv));
    }
    return {ScalarField1D(u.grid(), std::move(ut), u.mode()),
            ScalarField1D(u.grid(), std::move(ux), u.mode())};
}

std::vector<LevelView> solution_levels(const Solution& solution) {
    std::vector<LevelView> out;
    for (std::size_t s = 0; s < solution.slabs.size(); ++s) {
        const SlabState& st = solution.slabs[s];
        for (std::size_t j = (s == 0 ? 0 : 1); j < st.slab.m; ++j)
            out.push_back({st.slab.time(j), &st.u[j], &st.R[j], &st.S[j], &st.V[j], &st.W[j],
                           st.jac_min[j], st.jac_max[j], st.rate_max[j]});
    }
    return out;
}

PdeResidualReport pde_residual(const Solution& solution, const ProblemSpec& spec) {
    PdeResidualReport rep;
    for (const SlabState& st : solution.slabs) {
        const std::size_t m = st.slab.m;
        const std::size_t n = st.grid.size();
        if (m < 3 || n < 5) throw std::invalid_argument("pde_residual: slab too small");
        const double dt = st.slab.dt;
        const double h = st.grid.spacing();

        // flux q = (u^a)^2 u_x with central u_x, then a central x-derivative of q
        std::vector<std::vector<double>> q(m, std::vector<double>(n, 0.0));
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double du = (st.u[j].value(i + 1) - st.u[j].value(i - 1)) / (2.0 * h);
                const double c = spec.speed_coefficient(st.u[j].value(i));
                q[j][i] = c * c * du;
            }

        for (std::size_t j = 1; j + 1 < m; ++j) {
            double sup = 0.0;
            for (std::size_t i = 2; i + 2 < n; ++i) {
                const double utt = (st.u[j + 1].value(i) - 2.0 * st.u[j].value(i) +
                                    st.u[j - 1].value(i)) /
                                   (dt * dt);
                const double dq = (q[j][i + 1] - q[j][i - 1]) / (2.0 * h);
                const double du = (st.u[j].value(i + 1) - st.u[j].value(i - 1)) / (2.0 * h);
                const double resid = utt - dq - spec.flux_F.value(st.u[j].value(i)) * du;
                sup = std::max(sup, std::abs(resid));
            }
            rep.levels.push_back({st.slab.time(j), sup});
            rep.max_sup = std::max(rep.max_sup, sup);
        }
    }
    return rep;
}

}  // namespace qwave

#include "qwave/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "qwave/diagnostics.hpp"
#include "qwave/io.hpp"

namespace qwave {

namespace {

using nlohmann::ordered_json;

int termination_exit_code(Termination t) {
    switch (t) {
        case Termination::reached_target_T: return 0;
        case Termination::breakdown_blowup:
        case Termination::breakdown_degeneracy: return 3;
        case Termination::contraction_failure: return 4;
    }
    return 1;
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::reached_target_T: return "reached_target_T";
        case Termination::breakdown_blowup: return "breakdown_blowup";
        case Termination::breakdown_degeneracy: return "breakdown_degeneracy";
        case Termination::contraction_failure: return "contraction_failure";
    }
    return "unknown";
}

const char* breakdown_name(BreakdownKind k) {
    switch (k) {
        case BreakdownKind::none: return "none";
        case BreakdownKind::blowup: return "blowup";
        case BreakdownKind::degeneracy: return "degeneracy";
        case BreakdownKind::characteristic_crossing: return "characteristic_crossing";
    }
    return "unknown";
}

ordered_json assumptions_json(const AssumptionReport& rep) {
    ordered_json v = ordered_json::array();
    for (const auto& viol : rep.violations)
        v.push_back({{"condition", viol.condition},
                     {"worst_x", viol.worst_x},
                     {"worst_ratio", viol.worst_ratio}});
    return {{"passed", rep.passed},
            {"c1", rep.measured_c1},
            {"c2", rep.measured_c2},
            {"c3", rep.measured_c3},
            {"c4", rep.measured_c4},
            {"B1", rep.measured_B1},
            {"violations", v}};
}

ordered_json levi_json(const LeviReport& rep) {
    return {{"passed", rep.passed},
            {"C_K", rep.measured_C_K},
            {"C_K_prime", rep.measured_C_K_prime},
            {"C_all", rep.measured_C_all},
            {"violations", rep.violations}};
}

ordered_json stats_json(const Solution& sol) {
    ordered_json slabs = ordered_json::array();
    for (std::size_t s = 0; s < sol.stats.size(); ++s) {
        ordered_json e = {{"iterations", sol.stats[s].iterations},
                          {"converged", sol.stats[s].converged},
                          {"contraction_factor", sol.stats[s].factor},
                          {"distances", sol.stats[s].distances}};
        if (s < sol.slabs.size()) {
            e["t0"] = sol.slabs[s].slab.t0;
            e["t1"] = sol.slabs[s].slab.t1();
            e["dt"] = sol.slabs[s].slab.dt;
            e["levels"] = sol.slabs[s].slab.m;
        }
        slabs.push_back(e);
    }
    return {{"termination", termination_name(sol.termination)},
            {"reached_T", sol.reached_T},
            {"slabs", slabs}};
}

bool wants(const RunConfig& cfg, const std::string& format) {
    return std::find(cfg.output_formats.begin(), cfg.output_formats.end(), format) !=
           cfg.output_formats.end();
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output_directory);
    return (std::filesystem::path(cfg.output_directory) / name).string();
}

void write_json(const ordered_json& j, const std::string& path,
                std::vector<std::string>& files) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    files.push_back(path);
}

void plot_solution_snapshots(const Solution& sol, const RunConfig& cfg,
                             std::vector<std::string>& files) {
    const auto levels = solution_levels(sol);
    if (levels.empty()) return;
    std::vector<std::size_t> picks{0, levels.size() / 2, levels.size() - 1};
    std::vector<PlotSeries> series;
    char label[48];
    for (std::size_t p : picks) {
        const LevelView& lv = levels[p];
        PlotSeries s;
        std::snprintf(label, sizeof label, "u(t=%.6g)", lv.t);
        s.name = label;
        for (std::size_t i = 0; i < lv.u->size(); ++i) {
            s.x.push_back(lv.u->grid().node(i));
            s.y.push_back(lv.u->value(i));
        }
        series.push_back(std::move(s));
    }
    const std::string path = out_path(cfg, "solution.svg");
    emit_plot(series, path, "solution snapshots");
    files.push_back(path);
}

RunResult do_validate(const RunConfig& cfg) {
    RunResult res;
    const AssumptionReport rep = validate_assumptions(cfg.problem, cfg.grid);
    const LeviReport levi = check_levi(cfg.problem, 200);
    res.report = {{"assumptions", assumptions_json(rep)},
                  {"levi", levi_json(levi)},
                  {"warnings", cfg.warnings}};
    res.exit_code = (rep.passed && levi.passed) ? 0 : 2;
    if (wants(cfg, "json")) write_json(res.report, out_path(cfg, "validate.json"), res.files_written);
    return res;
}

// validate, then run the solver; shared by solve/diagnose/converge/oracle.
int validated_solution(const RunConfig& cfg, RunResult& res, Solution& sol) {
    const AssumptionReport rep = validate_assumptions(cfg.problem, cfg.grid);
    const LeviReport levi = check_levi(cfg.problem, 200);
    if (!rep.passed || !levi.passed) {
        res.report["validate"] = {{"assumptions", assumptions_json(rep)},
                                  {"levi", levi_json(levi)}};
        return 2;
    }
    sol = continue_solution(cfg.problem, cfg.grid, cfg.solver);
    res.report["contraction"] = stats_json(sol);
    return termination_exit_code(sol.termination);
}

RunResult do_solve(const RunConfig& cfg) {
    RunResult res;
    Solution sol;
    res.exit_code = validated_solution(cfg, res, sol);
    if (res.exit_code == 2) {
        if (wants(cfg, "json"))
            write_json(res.report, out_path(cfg, "contraction.json"), res.files_written);
        return res;
    }
    if (wants(cfg, "csv") && !sol.slabs.empty()) {
        const std::string path = out_path(cfg, "solution.csv");
        write_solution_csv(sol, cfg.problem, path);
        res.files_written.push_back(path);
    }
    if (wants(cfg, "json"))
        write_json(res.report, out_path(cfg, "contraction.json"), res.files_written);
    if (wants(cfg, "svg") && !sol.slabs.empty()) plot_solution_snapshots(sol, cfg, res.files_written);
    return res;
}

LipschitzProbeReport run_lipschitz_probe(const Solution& sol, const RunConfig& cfg) {
    const SlabState& st = sol.slabs.front();
    double A1 = 0.0;
    for (const auto& f : st.u) A1 = std::max(A1, f.max_value());
    const double a = cfg.problem.exponent_a;
    const double slab_len = st.slab.t1() - st.slab.t0;
    const double margin = std::pow(A1, a) * slab_len + 2.0 * st.grid.spacing();
    const double lo = st.grid.x_min + margin;
    const double hi = st.grid.x_max - margin;
    if (!(lo < hi)) return {};  // domain too narrow to probe safely

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ux(lo, hi);
    std::uniform_real_distribution<double> ut(st.slab.t0, st.slab.t1());
    std::vector<LipschitzSample> samples(100);
    for (auto& s : samples) s = {ut(rng), ux(rng), ut(rng), ux(rng), ut(rng), ut(rng)};

    const StateSpeed speed(st, cfg.problem);
    return lipschitz_probe(speed, samples, lipschitz_bound(A1, a), st.slab.dt,
                           Interval{st.grid.x_min, st.grid.x_max});
}

RunResult do_diagnose(const RunConfig& cfg) {
    RunResult res;
    Solution sol;
    res.exit_code = validated_solution(cfg, res, sol);
    if (res.exit_code == 2 || sol.slabs.empty()) {
        if (wants(cfg, "json"))
            write_json(res.report, out_path(cfg, "diagnostics.json"), res.files_written);
        return res;
    }

    const DecayReport decay = decay_report(sol, cfg.problem, cfg.diagnostics.margin);
    ordered_json levels = ordered_json::array();
    for (const DecayLevel& d : decay.levels)
        levels.push_back({{"t", d.t},
                          {"c1", d.c1},
                          {"c2", d.c2},
                          {"c3", d.c3},
                          {"c4", d.c4},
                          {"c4_dx", d.c4_dx},
                          {"c4_dt", d.c4_dt}});
    res.report["decay"] = {{"margin", decay.margin},
                           {"c1_pass", decay.c1_pass},
                           {"c2_pass", decay.c2_pass},
                           {"c3_pass", decay.c3_pass},
                           {"c4_pass", decay.c4_pass},
                           {"levels", levels}};

    const BreakdownFlag flag = detect_breakdown(
        sol, cfg.problem,
        {cfg.diagnostics.blowup_cap, cfg.diagnostics.degeneracy_floor_fraction});
    res.report["breakdown"] = {{"kind", breakdown_name(flag.kind)},
                               {"time", flag.time},
                               {"witness_x", flag.witness_x},
                               {"witness_value", flag.witness_value}};

    if (cfg.problem.flux_F.kind != FluxSpec::Kind::general) {
        const ConservationReport cons = conservation_form_residual(sol, cfg.problem);
        res.report["conservation"] = {{"sup_ut_minus_vx", cons.sup_ut_minus_vx},
                                      {"sup_momentum_residual", cons.sup_momentum_residual}};
    }
    if (cfg.problem.flux_F.is_zero()) {
        const SignPreservationReport sign = sign_preservation_check(sol, cfg.problem);
        res.report["sign_preservation"] = {{"min_R", sign.min_R},
                                           {"min_S", sign.min_S},
                                           {"initial_nonnegative", sign.initial_nonnegative},
                                           {"preserved", sign.preserved}};
    }

    const JacobianBoundReport jac = jacobian_bound_check(sol.slabs.front(), cfg.problem);
    const LipschitzProbeReport lip = run_lipschitz_probe(sol, cfg);
    res.report["flow_probes"] = {{"jacobian",
                                   {{"measured_C", jac.measured_C},
                                    {"min_jacobian", jac.min_jacobian},
                                    {"worst_margin", jac.worst_margin},
                                    {"passed", jac.passed}}},
                                  {"lipschitz",
                                   {{"max_ratio", lip.max_ratio},
                                    {"bound", lip.bound},
                                    {"checked", lip.n_checked},
                                    {"skipped", lip.n_skipped},
                                    {"passed", lip.passed}}}};

    const PdeResidualReport resid = pde_residual(sol, cfg.problem);
    res.report["pde_residual"] = {{"max_sup", resid.max_sup}};

    if (res.exit_code == 0 && flag.kind != BreakdownKind::none) res.exit_code = 3;

    if (wants(cfg, "json"))
        write_json(res.report, out_path(cfg, "diagnostics.json"), res.files_written);
    if (wants(cfg, "svg")) {
        std::vector<PlotSeries> series(4);
        series[0].name = "inf <x>^a u";
        series[1].name = "sup u";
        series[2].name = "C3 (beta norm)";
        series[3].name = "C4 (gamma norm)";
        for (const DecayLevel& d : decay.levels) {
            series[0].x.push_back(d.t);
            series[0].y.push_back(d.c1);
            series[1].x.push_back(d.t);
            series[1].y.push_back(d.c2);
            series[2].x.push_back(d.t);
            series[2].y.push_back(d.c3);
            series[3].x.push_back(d.t);
            series[3].y.push_back(d.c4);
        }
        const std::string path = out_path(cfg, "decay.svg");
        emit_plot(series, path, "weighted decay constants");
        res.files_written.push_back(path);
    }
    return res;
}

RunResult do_converge(const RunConfig& cfg) {
    RunResult res;
    // Pin the slab layout once so every refinement level shares boundaries.
    double slab_len = cfg.solver.initial_slab_length
                          ? *cfg.solver.initial_slab_length
                          : slab_length_policy(cfg.problem, cfg.grid);
    slab_len = std::min(slab_len, cfg.solver.T_target);

    std::vector<Solution> runs;
    ordered_json table = ordered_json::array();
    for (int level = 0; level < 3; ++level) {
        RunConfig c = cfg;
        const std::size_t factor = std::size_t{1} << level;
        c.grid = Grid1D(cfg.grid.x_min, cfg.grid.x_max, (cfg.grid.size() - 1) * factor + 1);
        c.solver.levels_per_slab = (cfg.solver.levels_per_slab - 1) * factor + 1;
        c.solver.initial_slab_length = slab_len;
        Solution sol;
        const int code = validated_solution(c, res, sol);
        if (code != 0) {
            res.exit_code = code;
            if (wants(cfg, "json"))
                write_json(res.report, out_path(cfg, "convergence.json"), res.files_written);
            return res;
        }
        table.push_back({{"level", level},
                         {"n_points", c.grid.size()},
                         {"h", c.grid.spacing()},
                         {"dt", sol.slabs.front().slab.dt}});
        runs.push_back(std::move(sol));
    }

    // sup difference of consecutive levels at the final time, on coarse nodes
    auto final_u = [](const Solution& s) -> const ScalarField1D& {
        return s.slabs.back().u.back();
    };
    std::vector<double> diffs;
    for (int level = 0; level + 1 < 3; ++level) {
        const ScalarField1D& coarse = final_u(runs[level]);
        const ScalarField1D& fine = final_u(runs[level + 1]);
        const std::size_t stride = 2;
        double d = 0.0;
        for (std::size_t i = 0; i < coarse.size(); ++i)
            d = std::max(d, std::abs(coarse.value(i) - fine.value(i * stride)));
        diffs.push_back(d);
    }
    const double order =
        (diffs[1] > 0.0) ? std::log2(diffs[0] / diffs[1]) : std::numeric_limits<double>::infinity();
    res.report["convergence"] = {{"levels", table},
                                 {"diff_coarse_mid", diffs[0]},
                                 {"diff_mid_fine", diffs[1]},
                                 {"fitted_order", order}};
    res.exit_code = 0;
    if (wants(cfg, "json"))
        write_json(res.report, out_path(cfg, "convergence.json"), res.files_written);
    return res;
}

RunResult do_oracle_compare(const RunConfig& cfg) {
    RunResult res;
    if (cfg.problem.exponent_a != 0.0 || !cfg.problem.flux_F.is_zero()) {
        res.report["error"] = "oracle-compare requires a = 0 and F = 0";
        res.exit_code = 2;
        return res;
    }
    Solution sol;
    res.exit_code = validated_solution(cfg, res, sol);
    if (res.exit_code != 0) {
        if (wants(cfg, "json"))
            write_json(res.report, out_path(cfg, "oracle.json"), res.files_written);
        return res;
    }
    double sup_err = 0.0;
    for (const LevelView& lv : solution_levels(sol)) {
        for (std::size_t i = 0; i < lv.u->size(); ++i) {
            const double ref =
                dalembert_value(cfg.problem.u0_expr, cfg.problem.u1_expr, lv.t,
                                lv.u->grid().node(i));
            sup_err = std::max(sup_err, std::abs(lv.u->value(i) - ref));
        }
    }
    res.report["oracle_compare"] = {{"sup_error", sup_err}, {"T", sol.reached_T}};
    if (wants(cfg, "json"))
        write_json(res.report, out_path(cfg, "oracle.json"), res.files_written);
    return res;
}

double adaptive_simpson(const Expr& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f.eval(lm), frm = f.eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double dalembert_value(const Expr& u0, const Expr& u1, double t, double x) {
    double v = 0.5 * (u0.eval(x + t) + u0.eval(x - t));
    double c;
    if (!(u1.is_constant(&c) && c == 0.0) && t != 0.0) {
        const double a = x - t, b = x + t;
        const double fa = u1.eval(a), fb = u1.eval(b), fm = u1.eval(0.5 * (a + b));
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        v += 0.5 * adaptive_simpson(u1, a, b, fa, fm, fb, whole, 1e-13, 40);
    }
    return v;
}

Command parse_command(const std::string& name) {
    if (name == "validate") return Command::validate;
    if (name == "solve") return Command::solve;
    if (name == "diagnose") return Command::diagnose;
    if (name == "converge") return Command::converge;
    if (name == "oracle-compare") return Command::oracle_compare;
    throw std::invalid_argument("unknown command: " + name);
}

RunResult run_command(Command command, const RunConfig& config) {
    switch (command) {
        case Command::validate: return do_validate(config);
        case Command::solve: return do_solve(config);
        case Command::diagnose: return do_diagnose(config);
        case Command::converge: return do_converge(config);
        case Command::oracle_compare: return do_oracle_compare(config);
    }
    throw std::logic_error("run_command: unreachable");
}

}  // namespace qwave

#include "qwave/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace qwave {

namespace {

using nlohmann::json;

RunConfig build_config(const json& j) {
    std::vector<std::string> errors;
    RunConfig cfg;

    auto get_or = [&](const json& obj, const char* key, auto fallback) {
        using T = decltype(fallback);
        if (!obj.contains(key)) return fallback;
        try {
            return obj.at(key).get<T>();
        } catch (const json::exception& e) {
            errors.push_back(std::string("key \"") + key + "\": " + e.what());
            return fallback;
        }
    };

    if (!j.contains("problem")) {
        throw ConfigError("config: missing required section \"problem\"");
    }
    const json& jp = j.at("problem");

    ProblemSpec& p = cfg.problem;
    p.exponent_a = get_or(jp, "a", 0.0);
    p.alpha = get_or(jp, "alpha", 0.0);
    p.beta = get_or(jp, "beta", 0.0);

    auto parse_expr_field = [&](const json& obj, const char* key, const char* fallback) {
        const std::string text = get_or(obj, key, std::string(fallback));
        try {
            return Expr::parse(text);
        } catch (const ExprError& e) {
            errors.push_back(std::string("key \"") + key + "\": " + e.what());
            return Expr::constant(1.0);
        }
    };
    p.u0_expr = parse_expr_field(jp, "u0", "1");
    p.u1_expr = parse_expr_field(jp, "u1", "0");

    if (jp.contains("coefficient")) {
        const json& jc = jp.at("coefficient");
        const std::string mode = get_or(jc, "mode", std::string("power"));
        if (mode == "general") {
            try {
                set_general_coefficient(cfg.problem, parse_expr_field(jc, "c", "x"));
            } catch (const ExprError& e) {
                errors.push_back(std::string("coefficient c: ") + e.what());
            }
        } else if (mode != "power") {
            errors.push_back("coefficient.mode must be \"power\" or \"general\"");
        }
    }

    if (jp.contains("flux")) {
        const json& jf = jp.at("flux");
        const std::string type = get_or(jf, "type", std::string("zero"));
        if (type == "zero") {
            p.flux_F = FluxSpec::zero();
        } else if (type == "power") {
            p.flux_F = FluxSpec::power(get_or(jf, "lambda", 1.0), get_or(jf, "b", 1.0));
        } else if (type == "general") {
            try {
                p.flux_F = FluxSpec::general(parse_expr_field(jf, "F", "0"));
            } catch (const ExprError& e) {
                errors.push_back(std::string("flux F: ") + e.what());
            }
        } else {
            errors.push_back("flux.type must be \"zero\", \"power\" or \"general\"");
        }
    }

    if (j.contains("grid")) {
        const json& jg = j.at("grid");
        const double xmin = get_or(jg, "x_min", -10.0);
        const double xmax = get_or(jg, "x_max", 10.0);
        const double n = get_or(jg, "n_points", 2001.0);
        if (!(n >= 2.0) || n != std::floor(n))
            errors.push_back("grid.n_points must be an integer >= 2");
        else if (!(xmin < xmax))
            errors.push_back("grid: x_min must be < x_max");
        else
            cfg.grid = Grid1D(xmin, xmax, static_cast<std::size_t>(n));
    }

    if (j.contains("time")) {
        const json& jt = j.at("time");
        cfg.solver.T_target = get_or(jt, "T_target", 0.1);
        const double m = get_or(jt, "levels_per_slab", 65.0);
        if (!(m >= 2.0) || m != std::floor(m))
            errors.push_back("time.levels_per_slab must be an integer >= 2");
        else
            cfg.solver.levels_per_slab = static_cast<std::size_t>(m);
        if (jt.contains("initial_slab_length")) {
            const json& jl = jt.at("initial_slab_length");
            if (jl.is_string()) {
                if (jl.get<std::string>() != "auto")
                    errors.push_back("time.initial_slab_length must be a number or \"auto\"");
            } else {
                const double len = get_or(jt, "initial_slab_length", 0.1);
                if (!(len > 0.0))
                    errors.push_back("time.initial_slab_length must be positive or \"auto\"");
                else
                    cfg.solver.initial_slab_length = len;
            }
        }
    }

    if (j.contains("solver")) {
        const json& js = j.at("solver");
        cfg.solver.tol = get_or(js, "tol", 1e-10);
        const double it = get_or(js, "max_iter", 30.0);
        if (!(it >= 1.0))
            errors.push_back("solver.max_iter must be >= 1");
        else
            cfg.solver.max_iter = static_cast<std::size_t>(it);
        const std::string interp = get_or(js, "interpolation", std::string("cubic_monotone"));
        if (interp == "linear")
            cfg.solver.interpolation = InterpMode::linear;
        else if (interp == "cubic_monotone")
            cfg.solver.interpolation = InterpMode::cubic_monotone;
        else
            errors.push_back("solver.interpolation must be \"linear\" or \"cubic_monotone\"");
    }

    if (j.contains("diagnostics")) {
        const json& jd = j.at("diagnostics");
        cfg.diagnostics.blowup_cap = get_or(jd, "blowup_cap", 1e3);
        cfg.diagnostics.degeneracy_floor_fraction =
            get_or(jd, "degeneracy_floor_fraction", 1e-3);
        cfg.diagnostics.margin = get_or(jd, "margin", 4.0);
    }
    cfg.solver.blowup_cap = cfg.diagnostics.blowup_cap;
    cfg.solver.degeneracy_floor_fraction = cfg.diagnostics.degeneracy_floor_fraction;

    if (j.contains("output")) {
        const json& jo = j.at("output");
        cfg.output_directory = get_or(jo, "directory", std::string("."));
        if (jo.contains("formats"))
            cfg.output_formats = jo.at("formats").get<std::vector<std::string>>();
    }
    cfg.seed = static_cast<std::uint64_t>(get_or(j, "seed", 0.0));

    // Semantic cross-checks, reported together.
    if (!(p.exponent_a >= 0.0)) errors.push_back("problem.a must be >= 0");
    if (!(p.alpha >= 0.0)) errors.push_back("problem.alpha must be >= 0");
    if (!(p.beta >= 0.0)) errors.push_back("problem.beta must be >= 0");
    if (p.exponent_a >= 0.0 && p.alpha >= 0.0 && p.beta >= 0.0) {
        if (p.exponent_a <= 1.0 && !(p.alpha <= p.beta))
            errors.push_back("admissibility (ab1): alpha <= beta required for a <= 1");
        if (p.exponent_a >= 1.0 && !(p.exponent_a * p.alpha <= p.beta))
            errors.push_back("admissibility (ab2): a*alpha <= beta required for a >= 1");
        p.gamma = (p.exponent_a >= 1.0) ? 0.0 : derive_gamma(p.exponent_a, p.alpha);
    }
    if (!(cfg.solver.T_target > 0.0)) errors.push_back("time.T_target must be positive");
    if (!(cfg.solver.tol > 0.0)) errors.push_back("solver.tol must be positive");
    if (!(cfg.diagnostics.margin > 0.0)) errors.push_back("diagnostics.margin must be positive");

    // K_bound default: max(2 sup u0, 1), measured on the run grid.
    if (jp.contains("K_bound")) {
        p.K_bound = get_or(jp, "K_bound", 1.0);
        if (!(p.K_bound > 0.0)) errors.push_back("problem.K_bound must be positive");
    } else if (errors.empty()) {
        double sup_u0 = 0.0;
        for (std::size_t i = 0; i < cfg.grid.size(); ++i)
            sup_u0 = std::max(sup_u0, cfg.problem.u0_expr.eval(cfg.grid.node(i)));
        p.K_bound = std::max(2.0 * sup_u0, 1.0);
    }

    if (!errors.empty()) {
        std::ostringstream os;
        os << "config: " << errors.size() << " violation(s):";
        for (const auto& e : errors) os << "\n  - " << e;
        throw ConfigError(os.str());
    }

    // Boundary-influence warning: values within (sup u0)^a T + 2h of an edge
    // are affected by the flat extension there.
    {
        double sup_u0 = 0.0;
        for (std::size_t i = 0; i < cfg.grid.size(); ++i)
            sup_u0 = std::max(sup_u0, cfg.problem.u0_expr.eval(cfg.grid.node(i)));
        const double pad = std::pow(sup_u0, p.exponent_a) * cfg.solver.T_target +
                           2.0 * cfg.grid.spacing();
        const double quarter = 0.25 * (cfg.grid.x_max - cfg.grid.x_min);
        if (pad > quarter) {
            std::ostringstream os;
            os << "grid padding: boundary influence zone " << pad
               << " exceeds a quarter of the domain; widen [x_min, x_max] or shorten T_target";
            cfg.warnings.push_back(os.str());
        }
    }
    return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return build_config(j);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace qwave

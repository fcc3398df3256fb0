#include <cstdio>
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "qwave/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"characteristic-based solver for the degenerate quasilinear wave equation "
                 "u_tt = (u^{2a} u_x)_x + F(u) u_x"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long long seed = -1;

    for (const char* name :
         {"validate", "solve", "diagnose", "converge", "oracle-compare"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed, "RNG seed for probe sampling (overrides config)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        qwave::RunConfig cfg = qwave::load_config(config_path);
        if (!out_dir.empty()) cfg.output_directory = out_dir;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';

        const std::string name = app.get_subcommands().front()->get_name();
        const qwave::RunResult res = qwave::run_command(qwave::parse_command(name), cfg);

        std::cout << res.report.dump(2) << '\n';
        for (const auto& f : res.files_written) std::cerr << "wrote " << f << '\n';
        return res.exit_code;
    } catch (const qwave::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

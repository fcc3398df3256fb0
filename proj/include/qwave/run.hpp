#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "qwave/config.hpp"

namespace qwave {

enum class Command { validate, solve, diagnose, converge, oracle_compare };

Command parse_command(const std::string& name);

struct RunResult {
    int exit_code = 0;  // 0 ok, 2 admissibility failure, 3 breakdown, 4 contraction failure
    nlohmann::ordered_json report;
    std::vector<std::string> files_written;
};

/// Executes one workflow against a validated configuration, writing the
/// requested artifacts into config.output_directory.
RunResult run_command(Command command, const RunConfig& config);

/// d'Alembert solution of the a = 0, F = 0 limit:
/// ½(u0(x+t) + u0(x−t)) + ½ ∫_{x−t}^{x+t} u1.
double dalembert_value(const Expr& u0, const Expr& u1, double t, double x);

}  // namespace qwave

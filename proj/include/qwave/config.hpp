#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qwave/problem.hpp"
#include "qwave/solver.hpp"

namespace qwave {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DiagnosticsOptions {
    double blowup_cap = 1e3;
    double degeneracy_floor_fraction = 1e-3;
    double margin = 4.0;
};

struct RunConfig {
    ProblemSpec problem;
    Grid1D grid{-10.0, 10.0, 2001};
    SolverOptions solver;
    DiagnosticsOptions diagnostics;
    std::string output_directory = ".";
    std::vector<std::string> output_formats{"csv", "json", "svg"};
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

/// Parse and cross-validate a run configuration from a JSON file. Semantic
/// violations are collected and reported all at once.
RunConfig load_config(const std::string& path);

/// Same, from a JSON string (tests and embedded configs).
RunConfig parse_config(const std::string& json_text);

}  // namespace qwave

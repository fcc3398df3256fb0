#pragma once

#include <string>
#include <vector>

#include "qwave/diagnostics.hpp"
#include "qwave/solver.hpp"

namespace qwave {

/// Solution table `t,x,u,R,S,u_t,u_x,V,W`, t-major and x-minor, 15
/// significant digits, shared slab-boundary levels written once.
void write_solution_csv(const Solution& solution, const ProblemSpec& spec,
                        const std::string& path);

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained SVG line plot (axes, ticks, legend); byte-identical output
/// for identical input.
void emit_plot(const std::vector<PlotSeries>& series, const std::string& path,
               const std::string& title = "");

}  // namespace qwave

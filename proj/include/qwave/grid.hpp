#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>

namespace qwave {

/// Uniform 1D grid on [x_min, x_max] with n_points nodes.
struct Grid1D {
    double x_min = 0.0;
    double x_max = 1.0;
    std::size_t n_points = 2;

    Grid1D() = default;
    Grid1D(double xmin, double xmax, std::size_t n) : x_min(xmin), x_max(xmax), n_points(n) {
        if (!(x_min < x_max)) throw std::invalid_argument("Grid1D: x_min must be < x_max");
        if (n_points < 2) throw std::invalid_argument("Grid1D: need at least 2 points");
    }

    double spacing() const { return (x_max - x_min) / static_cast<double>(n_points - 1); }
    double node(std::size_t i) const { return x_min + static_cast<double>(i) * spacing(); }
    std::size_t size() const { return n_points; }

    bool contains(double x) const { return x >= x_min && x <= x_max; }
    double clamp(double x) const { return std::clamp(x, x_min, x_max); }

    /// Index of the cell [node(i), node(i+1)] containing x; clamped to valid cells.
    std::size_t cell_index(double x) const {
        const double t = (x - x_min) / spacing();
        if (t <= 0.0) return 0;
        std::size_t i = static_cast<std::size_t>(t);
        return std::min(i, n_points - 2);
    }

    bool operator==(const Grid1D&) const = default;
};

}  // namespace qwave

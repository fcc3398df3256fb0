#include "qwave/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qwave {

namespace {

std::string fmt(double v, const char* spec = "%.15g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

void write_solution_csv(const Solution& solution, const ProblemSpec& spec,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_solution_csv: cannot open " + path);
    out << "t,x,u,R,S,u_t,u_x,V,W\n";
    for (const LevelView& lv : solution_levels(solution)) {
        auto [ut, ux] = recover_gradients(*lv.u, *lv.R, *lv.S, spec);
        const Grid1D& g = lv.u->grid();
        for (std::size_t i = 0; i < g.size(); ++i) {
            out << fmt(lv.t) << ',' << fmt(g.node(i)) << ',' << fmt(lv.u->value(i)) << ','
                << fmt(lv.R->value(i)) << ',' << fmt(lv.S->value(i)) << ',' << fmt(ut.value(i))
                << ',' << fmt(ux.value(i)) << ',' << fmt(lv.V->value(i)) << ','
                << fmt(lv.W->value(i)) << '\n';
        }
    }
    if (!out) throw std::runtime_error("write_solution_csv: write failed for " + path);
}

namespace {

constexpr double kWidth = 800.0, kHeight = 500.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Range {
    double lo = 0.0, hi = 1.0;
};

Range data_range(const std::vector<PlotSeries>& series, bool x_axis) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : series)
        for (double v : (x_axis ? s.x : s.y)) {
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (!(lo < hi)) {
        if (!std::isfinite(lo)) return {0.0, 1.0};
        return {lo - 1.0, lo + 1.0};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

}  // namespace

void emit_plot(const std::vector<PlotSeries>& series, const std::string& path,
               const std::string& title) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_plot: cannot open " + path);

    const Range rx = data_range(series, true);
    const Range ry = data_range(series, false);
    auto X = [&](double v) {
        return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * (kWidth - kLeft - kRight);
    };
    auto Y = [&](double v) {
        return kHeight - kBottom - (v - ry.lo) / (ry.hi - ry.lo) * (kHeight - kTop - kBottom);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    // axes
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
        << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kHeight - kBottom << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (int k = 0; k <= 5; ++k) {
        const double fx = rx.lo + (rx.hi - rx.lo) * k / 5.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * k / 5.0;
        out << "<line x1=\"" << fmt(X(fx), "%.2f") << "\" y1=\"" << kHeight - kBottom
            << "\" x2=\"" << fmt(X(fx), "%.2f") << "\" y2=\"" << kHeight - kBottom + 5
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt(X(fx), "%.2f") << "\" y=\"" << kHeight - kBottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(fx, "%.4g") << "</text>\n";
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(Y(fy), "%.2f") << "\" x2=\""
            << kLeft << "\" y2=\"" << fmt(Y(fy), "%.2f") << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(Y(fy) + 4, "%.2f")
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(fy, "%.4g") << "</text>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& sr = series[s];
        if (sr.x.size() != sr.y.size())
            throw std::invalid_argument("emit_plot: series \"" + sr.name +
                                        "\" has mismatched lengths");
        if (sr.x.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % 6]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < sr.x.size(); ++i)
            out << fmt(X(sr.x[i]), "%.2f") << ',' << fmt(Y(sr.y[i]), "%.2f") << ' ';
        out << "\"/>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const double y = kTop + 16.0 * static_cast<double>(s);
        out << "<line x1=\"" << kWidth - kRight - 150 << "\" y1=\"" << y << "\" x2=\""
            << kWidth - kRight - 130 << "\" y2=\"" << y << "\" stroke=\"" << kPalette[s % 6]
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kWidth - kRight - 125 << "\" y=\"" << y + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[s].name
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("emit_plot: write failed for " + path);
}

}  // namespace qwave

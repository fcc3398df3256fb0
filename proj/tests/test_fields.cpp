#include <cmath>
#include <vector>

#include "doctest.h"
#include "qwave/field.hpp"

using namespace qwave;

namespace {

ScalarField1D sample(const Grid1D& g, double (*fn)(double), InterpMode mode) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = fn(g.node(i));
    return ScalarField1D(g, std::move(v), mode);
}

}  // namespace

TEST_CASE("bracket weight basics") {
    CHECK(bracket_weight(0.0) == 1.0);
    CHECK(bracket_weight(1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(bracket_weight(-2.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    CHECK(bracket_weight(-2.0) == bracket_weight(2.0));
}

TEST_CASE("weighted_sup examples") {
    const Grid1D g(-10.0, 10.0, 401);
    const auto f2 = sample(g, [](double x) { return std::pow(bracket_weight(x), -2.0); },
                           InterpMode::linear);
    CHECK(weighted_sup(f2, 2.0) == doctest::Approx(1.0).epsilon(1e-13));

    const auto zero = sample(g, [](double) { return 0.0; }, InterpMode::linear);
    CHECK(weighted_sup(zero, 5.0) == 0.0);

    // f = <x>^-1 with p = 2: brute-force node sup is <10> = sqrt(101)
    const auto f1 = sample(g, [](double x) { return 1.0 / bracket_weight(x); },
                           InterpMode::linear);
    double brute = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.node(i);
        brute = std::max(brute, bracket_weight(x) * bracket_weight(x) / bracket_weight(x));
    }
    CHECK(weighted_sup(f1, 2.0) == doctest::Approx(brute).epsilon(1e-14));
    CHECK(weighted_sup(f1, 2.0) == doctest::Approx(std::sqrt(101.0)).epsilon(1e-14));
}

TEST_CASE("weighted_sup with p = 0 is the plain sup and is homogeneous") {
    const Grid1D g(-3.0, 3.0, 101);
    const auto f = sample(g, [](double x) { return std::sin(3.0 * x) - 0.2; },
                          InterpMode::linear);
    double plain = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) plain = std::max(plain, std::abs(f.value(i)));
    CHECK(weighted_sup(f, 0.0) == plain);

    std::vector<double> scaled(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) scaled[i] = -7.25 * f.value(i);
    const ScalarField1D fs(g, scaled, InterpMode::linear);
    CHECK(weighted_sup(fs, 1.3) == doctest::Approx(7.25 * weighted_sup(f, 1.3)).epsilon(1e-14));
}

TEST_CASE("sample_expression evaluates pointwise") {
    const Grid1D g(-2.0, 2.0, 5);
    const auto one = sample_expression(Expr::parse("1"), g);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(one.value(i) == 1.0);

    const auto br = sample_expression(Expr::parse("bracket(x)^(-1)"), g);
    CHECK(br.value(2) == 1.0);  // x = 0

    const auto gauss = sample_expression(Expr::parse("exp(-x^2)"), g);
    CHECK(gauss.interpolate(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

    CHECK_THROWS_AS(sample_expression(Expr::parse("1/x"), Grid1D(-1.0, 1.0, 3)), ExprError);
}

TEST_CASE("interpolation is exact at nodes and on affine data") {
    const Grid1D g(0.0, 1.0, 11);
    for (InterpMode mode : {InterpMode::linear, InterpMode::cubic_monotone}) {
        const auto f = sample(g, [](double x) { return 3.0 * x - 1.0; }, mode);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(f.interpolate(g.node(i)) == f.value(i));
        CHECK(f.interpolate(0.37) == doctest::Approx(3.0 * 0.37 - 1.0).epsilon(1e-14));
    }
}

TEST_CASE("cubic mode reproduces quadratics between nodes") {
    // h = 0.1 grid over [0,1]; x^2 at x = 0.05
    const Grid1D g(0.0, 1.0, 11);
    const auto f = sample(g, [](double x) { return x * x; }, InterpMode::cubic_monotone);
    CHECK(std::abs(f.interpolate(0.05) - 0.0025) < 1e-4);

    // away from the extremum the limiter is inactive: exact to round-off
    const Grid1D g2(1.0, 2.0, 26);
    const auto f2 = sample(g2, [](double x) { return x * x; }, InterpMode::cubic_monotone);
    const double h2 = g2.spacing();
    for (double x : {1.013, 1.37, 1.862}) {
        CHECK(std::abs(f2.interpolate(x) - x * x) < 1e-10 * h2 * h2 + 1e-13);
    }
}

TEST_CASE("cubic mode never overshoots the local data range") {
    // step-like data is the classic overshoot trap
    const Grid1D g(0.0, 1.0, 21);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = g.node(i) < 0.5 ? 0.0 : 1.0;
    const ScalarField1D f(g, v, InterpMode::cubic_monotone);
    for (int k = 0; k <= 1000; ++k) {
        const double x = k / 1000.0;
        const double y = f.interpolate(x);
        CHECK(y >= -1e-14);
        CHECK(y <= 1.0 + 1e-14);
    }
    // strictly monotone data stays monotone
    const auto m = sample(g, [](double x) { return std::tanh(8.0 * (x - 0.5)); },
                          InterpMode::cubic_monotone);
    double prev = m.interpolate(0.0);
    for (int k = 1; k <= 500; ++k) {
        const double y = m.interpolate(k / 500.0);
        CHECK(y >= prev - 1e-14);
        prev = y;
    }
}

TEST_CASE("interpolate outside the grid raises") {
    const Grid1D g(0.0, 1.0, 5);
    const auto f = sample(g, [](double x) { return x; }, InterpMode::linear);
    CHECK_THROWS_AS(f.interpolate(1.5), OutOfDomainError);
    CHECK(f.interpolate_clamped(1.5) == 1.0);
    CHECK(f.interpolate_clamped(-3.0) == 0.0);
}

TEST_CASE("spatial derivative is second order") {
    const Grid1D g(-1.0, 1.0, 201);  // h = 0.01
    const auto c = sample(g, [](double) { return 4.2; }, InterpMode::linear);
    const auto dc = spatial_derivative(c);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(dc.value(i)) < 1e-12);

    const auto lin = sample(g, [](double x) { return x; }, InterpMode::linear);
    const auto dl = spatial_derivative(lin);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(dl.value(i) == doctest::Approx(1.0).epsilon(1e-12));

    const auto s = sample(g, [](double x) { return std::sin(x); }, InterpMode::linear);
    const auto ds = spatial_derivative(s);
    const std::size_t mid = g.size() / 2;  // x = 0
    CHECK(std::abs(ds.value(mid) - 1.0) < 1e-4);

    // order >= 1.9 under two refinements, on sin and exp
    for (auto fn : {+[](double x) { return std::sin(x); }, +[](double x) { return std::exp(x); }}) {
        double errs[3];
        for (int lvl = 0; lvl < 3; ++lvl) {
            const Grid1D gg(-1.0, 1.0, 50 * (1 << lvl) + 1);
            const auto ff = sample(gg, fn, InterpMode::linear);
            const auto df = spatial_derivative(ff);
            double e = 0.0;
            for (std::size_t i = 0; i < gg.size(); ++i) {
                const double x = gg.node(i);
                const double truth = (fn(x + 1e-7) - fn(x - 1e-7)) / 2e-7;
                e = std::max(e, std::abs(df.value(i) - truth));
            }
            errs[lvl] = e;
        }
        const double order1 = std::log2(errs[0] / errs[1]);
        const double order2 = std::log2(errs[1] / errs[2]);
        CHECK(order1 >= 1.9);
        CHECK(order2 >= 1.9);
    }
}

#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwave {

/// Anything that can report the propagation speed u^a (or c(u)) and its
/// spatial derivative at a space-time point.
template <class S>
concept SpeedModel = requires(const S s, double t, double x) {
    { s.speed(t, x) } -> std::convertible_to<double>;
    { s.speed_x(t, x) } -> std::convertible_to<double>;
};

/// Speed backed by plain callables; the test and probe workhorse.
struct FunctionSpeed {
    std::function<double(double, double)> value;
    std::function<double(double, double)> slope;

    double speed(double t, double x) const { return value(t, x); }
    double speed_x(double t, double x) const { return slope ? slope(t, x) : 0.0; }
};

class CharacteristicLeftDomain : public std::runtime_error {
public:
    CharacteristicLeftDomain(double exit_time, double exit_x)
        : std::runtime_error("characteristic left domain at t = " + std::to_string(exit_time) +
                             ", x = " + std::to_string(exit_x)),
          exit_time(exit_time),
          exit_x(exit_x) {}
    double exit_time;
    double exit_x;
};

struct PathSample {
    double s;
    double x;
};

/// One characteristic x±(s; t_anchor, x_anchor) sampled at integrator steps.
struct CharacteristicPath {
    int sign = +1;  // +1: x₊ family, -1: x₋ family
    double t_anchor = 0.0;
    double x_anchor = 0.0;
    std::vector<PathSample> samples;  // from t_anchor towards t_to
    double jacobian = 1.0;            // ∂ₓx± at the far endpoint (trace_jacobian)

    double endpoint() const { return samples.back().x; }
};

struct Interval {
    double lo, hi;
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// RK4 integration of dx/ds = sign · speed(s, x) from t_from to t_to with
/// uniform steps of size ≤ dt. If a domain is given, leaving it raises
/// CharacteristicLeftDomain (callers are expected to pad the grid).
template <SpeedModel S>
CharacteristicPath trace_characteristic(const S& speed, int sign, double t_from, double x_from,
                                        double t_to, double dt,
                                        std::optional<Interval> domain = std::nullopt) {
    if (!(dt > 0.0)) throw std::invalid_argument("trace_characteristic: dt must be positive");
    const double span = t_to - t_from;
    const std::size_t n_steps =
        span == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(std::abs(span) / dt - 1e-12));
    const double h = n_steps == 0 ? 0.0 : span / static_cast<double>(n_steps);
    const double sgn = static_cast<double>(sign);

    CharacteristicPath path;
    path.sign = sign;
    path.t_anchor = t_from;
    path.x_anchor = x_from;
    path.samples.reserve(n_steps + 1);
    path.samples.push_back({t_from, x_from});

    double x = x_from;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double s = t_from + static_cast<double>(k) * h;
        const double k1 = sgn * speed.speed(s, x);
        const double k2 = sgn * speed.speed(s + 0.5 * h, x + 0.5 * h * k1);
        const double k3 = sgn * speed.speed(s + 0.5 * h, x + 0.5 * h * k2);
        const double k4 = sgn * speed.speed(s + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double s_next = t_from + static_cast<double>(k + 1) * h;
        if (domain && !domain->contains(x)) throw CharacteristicLeftDomain(s_next, x);
        path.samples.push_back({s_next, x});
    }
    return path;
}

/// Integrates the variational equation d/ds ∂ₓx± = sign · speed_x(s, x(s)) · ∂ₓx±
/// along an already-traced path (∂ₓx± = 1 at the anchor), with the same steps.
/// The position between stored samples is reconstructed by a cubic Hermite
/// using the speed as the slope, keeping the overall order at four.
/// Stores and returns the far-endpoint Jacobian.
template <SpeedModel S>
double trace_jacobian(CharacteristicPath& path, const S& speed) {
    double jac = 1.0;
    const double sgn = static_cast<double>(path.sign);
    for (std::size_t k = 0; k + 1 < path.samples.size(); ++k) {
        const auto& p0 = path.samples[k];
        const auto& p1 = path.samples[k + 1];
        const double h = p1.s - p0.s;
        const double d0 = sgn * speed.speed(p0.s, p0.x);
        const double d1 = sgn * speed.speed(p1.s, p1.x);
        auto x_at = [&](double theta) {
            const double t2 = theta * theta, t3 = t2 * theta;
            return (2.0 * t3 - 3.0 * t2 + 1.0) * p0.x + (t3 - 2.0 * t2 + theta) * h * d0 +
                   (-2.0 * t3 + 3.0 * t2) * p1.x + (t3 - t2) * h * d1;
        };
        const double xm = x_at(0.5);
        const double sm = p0.s + 0.5 * h;
        const double r0 = sgn * speed.speed_x(p0.s, p0.x);
        const double rm = sgn * speed.speed_x(sm, xm);
        const double r1 = sgn * speed.speed_x(p1.s, p1.x);
        const double k1 = r0 * jac;
        const double k2 = rm * (jac + 0.5 * h * k1);
        const double k3 = rm * (jac + 0.5 * h * k2);
        const double k4 = r1 * (jac + h * k3);
        jac += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    path.jacobian = jac;
    return jac;
}

struct LipschitzSample {
    double t1, x1, t2, x2, t3, t4;
};

struct LipschitzProbeReport {
    double max_ratio = 0.0;
    double bound = 0.0;  // 3 (1 + A1^a)
    std::size_t n_checked = 0;
    std::size_t n_skipped = 0;
    bool passed = true;
};

inline double lipschitz_bound(double A1, double a) { return 3.0 * (1.0 + std::pow(A1, a)); }

/// Traces both families for each sample pair and reports the worst ratio
/// |x±(t3;t1,x1) − x±(t4;t2,x2)| / (|x1−x2| + |t1−t2| + |t3−t4|).
/// Samples with zero denominator are skipped and counted.
template <SpeedModel S>
LipschitzProbeReport lipschitz_probe(const S& speed, std::span<const LipschitzSample> samples,
                                     double bound, double dt,
                                     std::optional<Interval> domain = std::nullopt) {
    LipschitzProbeReport rep;
    rep.bound = bound;
    for (const auto& smp : samples) {
        const double denom =
            std::abs(smp.x1 - smp.x2) + std::abs(smp.t1 - smp.t2) + std::abs(smp.t3 - smp.t4);
        if (denom == 0.0) {
            ++rep.n_skipped;
            continue;
        }
        for (int sign : {-1, +1}) {
            const auto pa = trace_characteristic(speed, sign, smp.t1, smp.x1, smp.t3, dt, domain);
            const auto pb = trace_characteristic(speed, sign, smp.t2, smp.x2, smp.t4, dt, domain);
            const double ratio = std::abs(pa.endpoint() - pb.endpoint()) / denom;
            rep.max_ratio = std::max(rep.max_ratio, ratio);
        }
        ++rep.n_checked;
    }
    rep.passed = rep.max_ratio <= bound;
    return rep;
}

}  // namespace qwave

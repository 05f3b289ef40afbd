// Odd initial vorticity: a monotone ramp q(x1) rising from 0 at the axis to a
// plateau of 1, extended oddly across x1 = 0 and masked to the domain.
#pragma once

#include <cmath>
#include <functional>

#include "ess/common.hpp"
#include "ess/geometry.hpp"
#include "ess/grid.hpp"

namespace ess {

enum class ProfileKind { smoothstep_quintic, bump_exponential };

struct InitialDataParams {
    double epsilon = 0.05;
    double delta_strip = 1e-3;
    ProfileKind profile = ProfileKind::smoothstep_quintic;
    double amplitude = 1.0;  // plateau height; zero gives the trivial field
};

// The ramp finishes at epsilon^10; the profile is identically 1 beyond it.
inline double inner_scale(const InitialDataParams& p) { return std::pow(p.epsilon, 10); }

inline void validate_initial_params(const InitialDataParams& p) {
    if (!(p.epsilon > 0.0 && p.epsilon < 1.0))
        throw ConfigError("initial data: epsilon must lie in (0, 1)");
    if (!(p.delta_strip > 0.0))
        throw ConfigError("initial data: strip width must be positive");
    // The sub-unity set has width inner_scale; it must fit inside the strip.
    if (!(inner_scale(p) < p.delta_strip))
        throw ConfigError("initial data: ramp scale epsilon^10 must be below the strip width");
    if (!(p.amplitude >= 0.0)) throw ConfigError("initial data: amplitude must be nonnegative");
}

namespace detail {

// Quintic smoothstep on [0,1]: C^2 joins, maximum slope 15/8 at the midpoint.
inline double smoothstep5(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

inline double smoothstep5_deriv(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 30.0 * s * s * (1.0 - s) * (1.0 - s);
}

// C-infinity ramp built from exp(-1/s); flat to all orders at both ends.
inline double bump_ramp(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double g0 = std::exp(-1.0 / s);
    const double g1 = std::exp(-1.0 / (1.0 - s));
    return g0 / (g0 + g1);
}

inline double bump_ramp_deriv(double s) {
    const double eps_fd = 1e-7;
    const double lo = std::max(0.0, s - eps_fd), hi = std::min(1.0, s + eps_fd);
    return (bump_ramp(hi) - bump_ramp(lo)) / (hi - lo);
}

}  // namespace detail

// q(x1): 0 on [0, w/2], ramp on [w/2, w], 1 on [w, inf) with w = epsilon^10.
inline double initial_profile(const InitialDataParams& p, double x1) {
    const double w = inner_scale(p);
    if (x1 <= 0.5 * w) return 0.0;
    if (x1 >= w) return 1.0;
    const double s = (x1 - 0.5 * w) / (0.5 * w);
    return p.profile == ProfileKind::smoothstep_quintic ? detail::smoothstep5(s)
                                                        : detail::bump_ramp(s);
}

inline double initial_profile_slope(const InitialDataParams& p, double x1) {
    const double w = inner_scale(p);
    if (x1 <= 0.5 * w || x1 >= w) return 0.0;
    const double s = (x1 - 0.5 * w) / (0.5 * w);
    const double ds = p.profile == ProfileKind::smoothstep_quintic
                          ? detail::smoothstep5_deriv(s)
                          : detail::bump_ramp_deriv(s);
    return ds / (0.5 * w);
}

// Largest slope of the ramp: 15/8 (quintic) or ~1.92 (bump) over the half-width.
inline double initial_profile_max_slope(const InitialDataParams& p) {
    if (p.profile == ProfileKind::smoothstep_quintic) return (15.0 / 8.0) / (0.5 * inner_scale(p));
    double m = 0.0;
    for (int k = 1; k < 4096; ++k)
        m = std::max(m, detail::bump_ramp_deriv(k / 4096.0));
    return m / (0.5 * inner_scale(p));
}

// Odd-in-x1 pointwise evaluator, zero outside the domain.
inline std::function<double(Point2)> initial_omega(const Domain& dom,
                                                   const InitialDataParams& p) {
    validate_initial_params(p);
    return [&dom, p](Point2 x) {
        if (!dom.contains(x)) return 0.0;
        if (x.x > 0.0) return p.amplitude * initial_profile(p, x.x);
        if (x.x < 0.0) return -p.amplitude * initial_profile(p, -x.x);
        return 0.0;
    };
}

// Restriction to the right half (the folded-kernel integrators want this).
inline std::function<double(Point2)> initial_omega_positive(const Domain& dom,
                                                            const InitialDataParams& p) {
    validate_initial_params(p);
    return [&dom, p](Point2 x) {
        if (!(x.x > 0.0) || !dom.contains(x)) return 0.0;
        return p.amplitude * initial_profile(p, x.x);
    };
}

// The grid can only resolve the ramp if several cells fit inside it.
inline bool initial_data_under_resolved(const InitialDataParams& p, const Grid& g) {
    return g.h > 0.25 * inner_scale(p);
}

inline ScalarField build_initial_data(const Domain& dom, const InitialDataParams& p,
                                      const Grid& g) {
    auto om = initial_omega(dom, p);
    return ScalarField::sample(g, om);
}

// Field diagnostics used for data sanity and snapshot reporting.
inline double field_sup_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.v) m = std::max(m, std::fabs(v));
    return m;
}

// Largest centered difference quotient over nodes with both neighbors.
inline double field_max_gradient(const ScalarField& f) {
    const Grid& g = f.grid;
    double m = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
            const double gx = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * g.h);
            const double gy = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * g.h);
            m = std::max(m, std::hypot(gx, gy));
        }
    return m;
}

}  // namespace ess

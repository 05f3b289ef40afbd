// Comparison markers a(t) <= b(t): first coordinates of trajectories driven by
// the segment extrema of u1, tracked in log coordinates, plus the region
// integrity check, the gradient lower bound, and the growth-rate diagnostics.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ess/common.hpp"
#include "ess/geometry.hpp"
#include "ess/grid.hpp"

namespace ess {

// R(lo, hi): right-half points below the diagonal with lo < x1 < hi.
struct RegionR {
    double x1_lo = 0.0;
    double x1_hi = 0.0;
};

inline bool region_contains(const Domain& dom, const RegionR& r, Point2 x) {
    return x.x > r.x1_lo && x.x < r.x1_hi && x.y < x.x && dom.contains(x);
}

struct ABState {
    double t = 0.0;
    double a = 0.0;
    double b = 0.0;
    double log_a = 0.0;  // authoritative; a == exp(log_a) up to underflow
    double log_b = 0.0;

    static ABState initial(double eps) {
        if (!(eps > 0.0 && eps < 1.0))
            throw ConfigError("marker state: epsilon must lie in (0, 1)");
        ABState s;
        s.t = 0.0;
        s.log_a = 10.0 * std::log(eps);
        s.log_b = std::log(eps);
        // Exact user-facing scales; the log fields are authoritative thereafter.
        s.a = std::pow(eps, 10);
        s.b = eps;
        return s;
    }
};

struct SegmentExtrema {
    double lower = 0.0;  // min of u1 over the segment
    double upper = 0.0;  // max of u1 over the segment
};

namespace detail {

template <class F>
double golden_minimize(F&& f, double lo, double hi, int iters = 60) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < iters && hi - lo > 0.0; ++k) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    return std::min(fc, fd);
}

}  // namespace detail

// Extrema of u1 over the vertical segment {(x1, s) : wall < s < x1}, by dense
// sampling plus golden-section refinement around the discrete winner.
inline SegmentExtrema u1_segment_extrema(const Domain& dom,
                                         const std::function<double(Point2)>& u1_at,
                                         double x1, int n_samples = 64) {
    if (!(x1 > 0.0)) throw DomainError("segment extrema: x1 must be positive");
    const Box bb = dom.bounding_box();
    if (!(x1 < bb.xhi)) throw DomainError("segment extrema: x1 outside the domain width");
    const double wall = boundary_height(dom, x1);
    if (!(wall < x1)) throw DomainError("segment extrema: empty segment (wall above diagonal)");
    n_samples = std::max(n_samples, 64);
    const double len = x1 - wall;
    auto eval = [&](double s) { return u1_at({x1, s}); };

    int k_min = 0, k_max = 0;
    double v_min = std::numeric_limits<double>::infinity();
    double v_max = -std::numeric_limits<double>::infinity();
    std::vector<double> ss(static_cast<size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k) {
        // Stay strictly inside the segment so containment never wobbles.
        const double s = wall + len * (k + 0.5) / n_samples;
        ss[static_cast<size_t>(k)] = s;
        const double v = eval(s);
        if (v < v_min) {
            v_min = v;
            k_min = k;
        }
        if (v > v_max) {
            v_max = v;
            k_max = k;
        }
    }
    auto bracket = [&](int k) {
        const double lo = ss[static_cast<size_t>(std::max(0, k - 1))];
        const double hi = ss[static_cast<size_t>(std::min(n_samples - 1, k + 1))];
        return std::pair<double, double>{lo, hi};
    };
    const auto [lo_min, hi_min] = bracket(k_min);
    const auto [lo_max, hi_max] = bracket(k_max);
    SegmentExtrema ex;
    ex.lower = std::min(v_min, detail::golden_minimize(eval, lo_min, hi_min));
    ex.upper = std::max(v_max, -detail::golden_minimize([&](double s) { return -eval(s); },
                                                        lo_max, hi_max));
    return ex;
}

// Right-hand sides for the marker ODE: u1 extrema as functions of x1 at the
// frozen current time.
struct MarkerVelocities {
    std::function<double(double)> upper;  // drives a
    std::function<double(double)> lower;  // drives b
};

inline MarkerVelocities model_linear_decay(double lam) {
    auto u = [lam](double x1) { return -lam * x1; };
    return {u, u};
}

// u1 = kappa * x1 * log(x1): in log coordinates the marker obeys
// d(log x)/dt = kappa * log x, the double-exponential mechanism in one line.
inline MarkerVelocities model_xlogx(double kappa) {
    auto u = [kappa](double x1) { return kappa * x1 * std::log(x1); };
    return {u, u};
}

enum class StepStatus { ok, scale_exhausted };

struct StepResult {
    ABState state;
    StepStatus status = StepStatus::ok;
};

namespace detail {

// d(log x)/dt = u1(x)/x evaluated at x = exp(y).
inline double log_rate(const std::function<double(double)>& u1, double y) {
    const double x = std::exp(y);
    if (x <= 0.0 || !std::isfinite(x))
        throw SolverError("marker step: scale left the representable range");
    return u1(x) / x;
}

inline double rk4_log_step(const std::function<double(double)>& u1, double y, double dt) {
    const double k1 = log_rate(u1, y);
    const double k2 = log_rate(u1, y + 0.5 * dt * k1);
    const double k3 = log_rate(u1, y + 0.5 * dt * k2);
    const double k4 = log_rate(u1, y + dt * k3);
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

// One four-stage Runge-Kutta update of both markers in log coordinates.
// Both markers must decrease; a stays below b; dropping through scale_floor
// reports exhaustion (the expected end state of a collapsing run).
inline StepResult step_ab(const ABState& s, double dt, const MarkerVelocities& vel,
                          double scale_floor = 0.0) {
    if (!(dt > 0.0)) throw ConfigError("marker step: dt must be positive");
    if (!(s.a <= s.b) || !(s.log_a <= s.log_b))
        throw DomainError("marker step: ordering violation (a > b)");
    StepResult r;
    r.state.t = s.t + dt;
    r.state.log_a = detail::rk4_log_step(vel.upper, s.log_a, dt);
    r.state.log_b = detail::rk4_log_step(vel.lower, s.log_b, dt);
    r.state.a = std::exp(r.state.log_a);
    r.state.b = std::exp(r.state.log_b);
    if (!(r.state.log_a < s.log_a) || !(r.state.log_b < s.log_b))
        throw SolverError("marker step: marker failed to decrease");
    if (!(r.state.log_a <= r.state.log_b))
        throw DomainError("marker step: ordering violation after update");
    if (scale_floor > 0.0 && r.state.log_a <= std::log(scale_floor))
        r.status = StepStatus::scale_exhausted;
    return r;
}

struct RegionIntegrityReport {
    bool resolved = false;  // the region extends past the grid's floor
    int n_samples = 0;
    double min_value = std::numeric_limits<double>::quiet_NaN();
    double frac_below = 0.0;  // fraction of samples under 1 - tol
    double tol = 0.0;
    bool passed = false;
};

// Samples omega at the grid nodes inside the resolvable part of R(a, b)
// (first coordinate at least two cells from the axis, where the grid can see
// the plateau) and reports how far it sits below 1.  Below that floor the
// advertised tolerance 2h|grad omega| is vacuous by construction, so those
// scales are excluded rather than faked.
inline RegionIntegrityReport region_integrity_check(const ScalarField& omega_t,
                                                    const Domain& dom, const ABState& s) {
    RegionIntegrityReport rep;
    const Grid& g = omega_t.grid;
    const double x_lo = std::max(s.a, 2.0 * g.h);
    const double x_hi = s.b;
    if (!(x_lo < x_hi)) return rep;  // nothing resolvable: report unresolved

    ScalarField ghosted = omega_t;
    fill_mirror_ghosts(ghosted, dom, Extension::even);

    // The tolerance is local: each sample is excused only by its own gradient
    // (2 h |grad omega| at that node), so a flat corrupted patch cannot hide
    // behind the steepness it created at its rim.
    double tol_max = 0.0;
    double vmin = std::numeric_limits<double>::infinity();
    int count = 0, below = 0;
    for (int i = 0; i < g.nx; ++i) {
        const double x1 = g.x(i);
        if (!(x1 > x_lo && x1 < x_hi)) continue;
        for (int j = 0; j < g.ny; ++j) {
            const Point2 p{x1, g.y(j)};
            if (!(p.y < p.x) || !dom.contains(p)) continue;
            const double v = omega_t.at(i, j);
            vmin = std::min(vmin, v);
            ++count;
            const double gx = (ghosted.at(i + 1, j) - ghosted.at(i - 1, j)) / (2.0 * g.h);
            const double gy = (ghosted.at(i, j + 1) - ghosted.at(i, j - 1)) / (2.0 * g.h);
            const double tol_here = std::max(2.0 * g.h * std::hypot(gx, gy), 1e-9);
            tol_max = std::max(tol_max, tol_here);
            if (v < 1.0 - tol_here) ++below;
        }
    }
    rep.n_samples = count;
    if (count == 0) return rep;  // thinner than a cell: unresolved
    rep.resolved = true;
    rep.min_value = vmin;
    rep.tol = tol_max;
    rep.frac_below = static_cast<double>(below) / static_cast<double>(count);
    rep.passed = below == 0;
    return rep;
}

// Mean-value slope between omega = 0 at the origin and omega = 1 at (a, a).
inline double gradient_lower_bound(const ABState& s) {
    if (s.a > 0.0) return 1.0 / (std::sqrt(2.0) * s.a);
    return std::exp(-s.log_a) / std::sqrt(2.0);
}

struct GrowthRow {
    double t = 0.0;
    double a = 0.0;
    double b = 0.0;
    double log_a = 0.0;
    double log_b = 0.0;
    double u1u_at_a = 0.0;
    double u1l_at_b = 0.0;
    double lambda_bb = std::numeric_limits<double>::quiet_NaN();
    double grad_lower_bound = std::numeric_limits<double>::quiet_NaN();
    double gronwall_lhs = std::numeric_limits<double>::quiet_NaN();
    double gronwall_rhs_fit = std::numeric_limits<double>::quiet_NaN();
};

struct GrowthTrace {
    std::vector<GrowthRow> rows;
};

struct GronwallReport {
    bool ok = false;
    std::string status;       // "ok", "insufficient rows", "nonmonotone trace"
    double c_fit = 0.0;       // least-squares rate of d/dt(log a - log b) vs itself
    double c_critical = 0.0;  // tightest constant for the affine inequality form
    LineFit loglog_fit;       // log(log(1/a)) against t
    std::vector<double> lhs;      // numerical d/dt(log a - log b) per row
    std::vector<double> rhs_fit;  // c_fit * (gap + 2) per row
    std::vector<double> bound_implied;  // (gap0 + 2) exp(c_fit t) - 2, bound on the gap
    bool bound_holds = false;
};

// Differential-inequality diagnostic on the gap L = log a - log b: fits the
// decay rate, the tightest affine constant, the implied integrated bound on L,
// and the straightness of log(log(1/a)) in t.
inline GronwallReport gronwall_diagnostic(const GrowthTrace& trace) {
    GronwallReport rep;
    const auto& rows = trace.rows;
    if (rows.size() < 10) {
        rep.status = "insufficient rows";
        return rep;
    }
    for (size_t i = 1; i < rows.size(); ++i) {
        if (!(rows[i].log_a < rows[i - 1].log_a) || !(rows[i].log_b < rows[i - 1].log_b)) {
            rep.status = "nonmonotone trace";
            return rep;
        }
    }
    const size_t n = rows.size();
    std::vector<double> gap(n), t(n);
    for (size_t i = 0; i < n; ++i) {
        gap[i] = rows[i].log_a - rows[i].log_b;
        t[i] = rows[i].t;
    }
    rep.lhs.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const size_t lo = (i == 0) ? 0 : i - 1;
        const size_t hi = (i + 1 == n) ? i : i + 1;
        rep.lhs[i] = (gap[hi] - gap[lo]) / (t[hi] - t[lo]);
    }
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < n; ++i) {
        num += rep.lhs[i] * gap[i];
        den += gap[i] * gap[i];
    }
    rep.c_fit = (den > 0.0) ? num / den : 0.0;

    rep.c_critical = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i)
        if (gap[i] + 2.0 < 0.0)
            rep.c_critical = std::min(rep.c_critical, rep.lhs[i] / (gap[i] + 2.0));

    rep.rhs_fit.resize(n);
    rep.bound_implied.resize(n);
    rep.bound_holds = true;
    for (size_t i = 0; i < n; ++i) {
        rep.rhs_fit[i] = rep.c_fit * (gap[i] + 2.0);
        rep.bound_implied[i] = (gap[0] + 2.0) * std::exp(rep.c_fit * (t[i] - t[0])) - 2.0;
        // Integrated form with the fitted constant; 5% slack on the gap scale.
        if (gap[i] > rep.bound_implied[i] + 0.05 * std::fabs(gap[i]) + 1e-9)
            rep.bound_holds = false;
    }

    std::vector<double> loglog(n);
    for (size_t i = 0; i < n; ++i) {
        if (!(rows[i].log_a < 0.0)) {
            rep.status = "marker above unit scale";
            return rep;
        }
        loglog[i] = std::log(-rows[i].log_a);
    }
    rep.loglog_fit = linear_fit(t, loglog);
    rep.ok = true;
    rep.status = "ok";
    return rep;
}

struct ConsistencyReport {
    int checked = 0;
    int violations = 0;
    double worst_margin = 0.0;  // most negative slack observed
};

// Reported (never assumed): the lower segment extremum at b should not fall
// below -b (lambda(b,b) + C) by more than the stated slack.
inline ConsistencyReport velocity_lambda_consistency(const GrowthTrace& trace, double c_fit,
                                                     double slack = 0.1) {
    ConsistencyReport rep;
    for (const GrowthRow& r : trace.rows) {
        if (!std::isfinite(r.lambda_bb)) continue;
        ++rep.checked;
        const double floor_rhs = -r.b * (r.lambda_bb + c_fit) * (1.0 + slack) - 1e-12;
        const double margin = r.u1l_at_b - floor_rhs;
        if (margin < 0.0) {
            ++rep.violations;
            rep.worst_margin = std::min(rep.worst_margin, margin);
        }
    }
    return rep;
}

}  // namespace ess

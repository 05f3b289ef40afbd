// Semi-Lagrangian transport of the vorticity: solve for the stream function,
// trace characteristics backward with four-stage Runge-Kutta, interpolate the
// old field at the foot, and optionally re-impose odd symmetry exactly.
#pragma once

#include <cmath>
#include <utility>

#include "ess/common.hpp"
#include "ess/geometry.hpp"
#include "ess/grid.hpp"
#include "ess/initial_data.hpp"
#include "ess/poisson.hpp"

namespace ess {

enum class InterpKind { bilinear, bicubic };

struct EvolutionConfig {
    double dt = 0.01;
    double t_max = 4.0;
    double cfl_cap = 0.8;  // max|u| dt <= cfl_cap * h after halvings
    InterpKind interpolation = InterpKind::bicubic;
    bool resymmetrize = true;
};

struct SnapshotDiagnostics {
    double max_omega = 0.0;
    double min_omega = 0.0;
    double integral_omega = 0.0;  // right-half mass; transport conserves it
    double max_gradient = 0.0;
};

struct Snapshot {
    double t = 0.0;
    ScalarField omega;
    StreamFunction psi;  // the stream function that produced this step
    SnapshotDiagnostics diag;
    double dt_used = 0.0;
    int halvings = 0;
    int clamped = 0;  // boundary-crossing substeps pulled back inside
};

namespace detail {

// Pull an escaped point back to the last interior position on the segment
// from a known-inside anchor.  True crossings are discretization artifacts
// (the normal velocity vanishes on the wall), so the pull-back is tiny.
inline Point2 clamp_into_domain(const Domain& dom, Point2 p, Point2 anchor, int& clamps) {
    if (dom.contains(p)) return p;
    ++clamps;
    if (!dom.contains(anchor)) throw SolverError("backtrace clamp: anchor left the domain");
    double t_in = 0.0;
    double t_out = 1.0;
    for (int k = 0; k < 50; ++k) {
        const double t = 0.5 * (t_in + t_out);
        const Point2 q{anchor.x + t * (p.x - anchor.x), anchor.y + t * (p.y - anchor.y)};
        (dom.contains(q) ? t_in : t_out) = t;
    }
    return {anchor.x + t_in * (p.x - anchor.x), anchor.y + t_in * (p.y - anchor.y)};
}

}  // namespace detail

// Backward characteristic: integrates dX/ds = -u(X) over dt with four-stage
// Runge-Kutta; any substep that leaves the domain is clamped and counted.
inline Point2 backtrace(const Domain& dom, const StreamFunction& sf, Point2 x, double dt,
                        int& clamps) {
    auto vel = [&](Point2 p) {
        const VelocitySample u = velocity_at(sf, dom, p);
        return Point2{-u.u1, -u.u2};
    };
    auto shift = [](Point2 p, Point2 k, double s) {
        return Point2{p.x + s * k.x, p.y + s * k.y};
    };
    const Point2 k1 = vel(x);
    const Point2 k2 = vel(detail::clamp_into_domain(dom, shift(x, k1, 0.5 * dt), x, clamps));
    const Point2 k3 = vel(detail::clamp_into_domain(dom, shift(x, k2, 0.5 * dt), x, clamps));
    const Point2 k4 = vel(detail::clamp_into_domain(dom, shift(x, k3, dt), x, clamps));
    const Point2 sum{k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x,
                     k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y};
    return detail::clamp_into_domain(dom, shift(x, sum, dt / 6.0), x, clamps);
}

// Largest node speed of the stream function's velocity (centered differences).
inline double max_speed(const StreamFunction& sf, const Domain& dom) {
    const Grid& g = sf.psi.grid;
    double m = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
            if (!dom.contains(g.at(i, j))) continue;
            const double u1 = (sf.psi.at(i, j + 1) - sf.psi.at(i, j - 1)) / (2.0 * g.h);
            const double u2 = -(sf.psi.at(i + 1, j) - sf.psi.at(i - 1, j)) / (2.0 * g.h);
            m = std::max(m, std::hypot(u1, u2));
        }
    return m;
}

// One transport step with a cached stream solver; the velocity is frozen over
// the step, and dt is halved (at most four times) until the speed cap holds.
class Evolver {
  public:
    Evolver(const Domain& dom, const Grid& g, EvolutionConfig cfg, PoissonOptions popt = {})
        : dom_(&dom), grid_(g), cfg_(cfg), solver_(dom, g, popt) {}

    const EvolutionConfig& config() const { return cfg_; }

    Snapshot step(const ScalarField& omega, double t_now) {
        Snapshot snap;
        snap.psi = solver_.solve(omega);

        const double umax = max_speed(snap.psi, *dom_);
        double dt_eff = cfg_.dt;
        int halvings = 0;
        while (umax * dt_eff > cfg_.cfl_cap * grid_.h && halvings < 4) {
            dt_eff *= 0.5;
            ++halvings;
        }
        if (umax * dt_eff > cfg_.cfl_cap * grid_.h)
            throw SolverError("evolution step: speed cap unreachable after four halvings");

        ScalarField ghosted = omega;
        fill_mirror_ghosts(ghosted, *dom_, Extension::even);

        ScalarField out(grid_);
        int clamps = 0;
        for (int j = 0; j < grid_.ny; ++j)
            for (int i = 0; i < grid_.nx; ++i) {
                const Point2 x = grid_.at(i, j);
                if (!dom_->contains(x)) continue;
                const Point2 y = backtrace(*dom_, snap.psi, x, dt_eff, clamps);
                out.at(i, j) = cfg_.interpolation == InterpKind::bicubic
                                   ? interp_bicubic(ghosted, y, /*clamp_to_stencil=*/true).value
                                   : interp_bilinear(ghosted, y);
            }
        if (cfg_.resymmetrize) resymmetrize_odd(out);

        snap.t = t_now + dt_eff;
        snap.dt_used = dt_eff;
        snap.halvings = halvings;
        snap.clamped = clamps;
        snap.diag = diagnostics(out, *dom_);
        snap.omega = std::move(out);
        return snap;
    }

    static SnapshotDiagnostics diagnostics(const ScalarField& f, const Domain& dom) {
        SnapshotDiagnostics d;
        bool first = true;
        for (int j = 0; j < f.grid.ny; ++j)
            for (int i = 0; i < f.grid.nx; ++i) {
                if (!dom.contains(f.grid.at(i, j))) continue;
                const double v = f.at(i, j);
                if (first) {
                    d.max_omega = d.min_omega = v;
                    first = false;
                } else {
                    d.max_omega = std::max(d.max_omega, v);
                    d.min_omega = std::min(d.min_omega, v);
                }
            }
        d.integral_omega =
            masked_node_sum(f, [&](Point2 p) { return p.x > 0.0 && dom.contains(p); });
        d.max_gradient = field_max_gradient(f);
        return d;
    }

  private:
    const Domain* dom_;
    Grid grid_;
    EvolutionConfig cfg_;
    StreamSolver solver_;
};

}  // namespace ess

// The quadrant integral Lambda, the bounded residuals of the near-origin
// velocity representation u1/x1 = -Lambda + b1, u2/x2 = +Lambda + b2, and the
// diagonal outflow diagnostic built from them.
#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "ess/common.hpp"
#include "ess/geometry.hpp"
#include "ess/green.hpp"
#include "ess/grid.hpp"
#include "ess/quadrature.hpp"

namespace ess {

struct SectorSpec {
    double gamma = pi / 4.0;  // angular margin, in (0, pi/2)
    double delta = 0.05;      // radius cap for admissible samples
};

// Opening angle membership: sector 1 hugs the wall (angles up to pi/2 - gamma),
// sector 2 hugs the vertical axis (angles at least gamma).
inline bool in_sector_1(Point2 x, const SectorSpec& s) {
    if (!(x.x > 0.0)) return false;
    if (norm(x) > s.delta) return false;
    return std::atan2(x.y, x.x) <= pi / 2.0 - s.gamma;
}

inline bool in_sector_2(Point2 x, const SectorSpec& s) {
    if (!(x.x > 0.0)) return false;
    if (norm(x) > s.delta) return false;
    return std::atan2(x.y, x.x) >= s.gamma;
}

struct QuadrantRegion {
    Point2 corner{0.0, 0.0};
};

struct KeyIntegralResult {
    double lambda = 0.0;
    double err_estimate = 0.0;
    int cells = 0;
    bool converged = true;
};

// (4/pi) * integral over {y in right half, y1 >= x1, y2 >= x2} of
// y1 y2 / |y|^4 times the vorticity.  The corner keeps the origin singularity
// outside the region; refinement piles up toward the corner on its own.
inline KeyIntegralResult lambda_integral(const Domain& dom,
                                         const std::function<double(Point2)>& omega_pos,
                                         QuadrantRegion q, QuadratureOptions opt = {}) {
    if (!(q.corner.x > 0.0))
        throw DomainError("lambda integral: corner must have positive first coordinate");
    const Box bb = dom.bounding_box();
    const Box region_box{q.corner.x, std::max(q.corner.y, bb.ylo), bb.xhi, bb.yhi};
    if (region_box.xlo >= region_box.xhi || region_box.ylo >= region_box.yhi)
        return {0.0, 0.0, 0, true};
    auto inside = [&](Point2 y) {
        return y.x >= q.corner.x && y.y >= q.corner.y && dom.contains(y);
    };
    const QuadratureResult r = integrate_adaptive(
        region_box, [&](Point2 y) { return quadrant_kernel(y) * omega_pos(y); }, inside, opt);
    const double scale = 4.0 / pi;
    return {scale * r.value, scale * r.err_estimate, r.cells, r.converged};
}

inline KeyIntegralResult lambda_integral(const Domain& dom, const ScalarField& omega,
                                         QuadrantRegion q, QuadratureOptions opt = {}) {
    return lambda_integral(
        dom, [&](Point2 y) { return interp_bilinear(omega, y); }, q, opt);
}

struct ResidualSample {
    Point2 x{0.0, 0.0};
    double radius = 0.0;
    double u_over_coord = 0.0;  // u1/x1 for sector 1, u2/x2 for sector 2
    double lambda = 0.0;
    double residual = 0.0;  // b1 or b2
};

struct ResidualReport {
    std::vector<ResidualSample> samples;
    std::vector<Point2> rejected;
    double max_abs_residual = 0.0;
    double median_abs_residual = 0.0;
    double slope_u_over_coord_vs_logr = 0.0;
};

namespace detail {

inline void finish_residual_report(ResidualReport& rep) {
    if (rep.samples.empty()) return;
    std::vector<double> absres, logr, uoc;
    for (const ResidualSample& s : rep.samples) {
        absres.push_back(std::fabs(s.residual));
        logr.push_back(std::log(1.0 / s.radius));
        uoc.push_back(s.u_over_coord);
    }
    rep.max_abs_residual = *std::max_element(absres.begin(), absres.end());
    rep.median_abs_residual = median_abs(absres);
    if (rep.samples.size() >= 2) rep.slope_u_over_coord_vs_logr = linear_fit(logr, uoc).slope;
}

}  // namespace detail

// Pointwise velocity backend used by the residual and diagonal checks.
using VelocityEvaluator = std::function<VelocitySample(Point2)>;

// b1 = u1/x1 + Lambda over wall-sector samples; the divergent part of u1/x1
// lives entirely in Lambda, so the residual band stays bounded as the radius
// shrinks.
inline ResidualReport residual_b1(const Domain& dom,
                                  const std::function<double(Point2)>& omega_pos,
                                  const VelocityEvaluator& velocity, const SectorSpec& sector,
                                  const std::vector<Point2>& xs,
                                  QuadratureOptions lam_opt = {}) {
    ResidualReport rep;
    for (const Point2& x : xs) {
        if (!in_sector_1(x, sector) || !dom.contains(x)) {
            rep.rejected.push_back(x);
            continue;
        }
        const VelocitySample u = velocity(x);
        const KeyIntegralResult lam = lambda_integral(dom, omega_pos, {x}, lam_opt);
        ResidualSample s;
        s.x = x;
        s.radius = norm(x);
        s.u_over_coord = u.u1 / x.x;
        s.lambda = lam.lambda;
        s.residual = s.u_over_coord + lam.lambda;
        rep.samples.push_back(s);
    }
    detail::finish_residual_report(rep);
    return rep;
}

inline ResidualReport residual_b1(const Domain& dom,
                                  const std::function<double(Point2)>& omega_pos,
                                  const SectorSpec& sector, const std::vector<Point2>& xs,
                                  OddVelocityOptions vel_opt = {},
                                  QuadratureOptions lam_opt = {}) {
    return residual_b1(
        dom, omega_pos,
        [&](Point2 x) { return velocity_odd_green_adaptive(dom, omega_pos, x, vel_opt); },
        sector, xs, lam_opt);
}

// b2 = u2/x2 - Lambda over axis-sector samples.
inline ResidualReport residual_b2(const Domain& dom,
                                  const std::function<double(Point2)>& omega_pos,
                                  const VelocityEvaluator& velocity, const SectorSpec& sector,
                                  const std::vector<Point2>& xs,
                                  QuadratureOptions lam_opt = {}) {
    ResidualReport rep;
    for (const Point2& x : xs) {
        if (!in_sector_2(x, sector) || !dom.contains(x) || !(x.y > 0.0)) {
            rep.rejected.push_back(x);
            continue;
        }
        const VelocitySample u = velocity(x);
        const KeyIntegralResult lam = lambda_integral(dom, omega_pos, {x}, lam_opt);
        ResidualSample s;
        s.x = x;
        s.radius = norm(x);
        s.u_over_coord = u.u2 / x.y;
        s.lambda = lam.lambda;
        s.residual = s.u_over_coord - lam.lambda;
        rep.samples.push_back(s);
    }
    detail::finish_residual_report(rep);
    return rep;
}

inline ResidualReport residual_b2(const Domain& dom,
                                  const std::function<double(Point2)>& omega_pos,
                                  const SectorSpec& sector, const std::vector<Point2>& xs,
                                  OddVelocityOptions vel_opt = {},
                                  QuadratureOptions lam_opt = {}) {
    return residual_b2(
        dom, omega_pos,
        [&](Point2 x) { return velocity_odd_green_adaptive(dom, omega_pos, x, vel_opt); },
        sector, xs, lam_opt);
}

struct DiagonalSample {
    Point2 x{0.0, 0.0};
    double u1 = 0.0;
    double u2 = 0.0;
    double ratio = 0.0;  // -u1/u2
    double lambda = 0.0;
    bool outflow_ok = false;
};

struct DiagonalReport {
    std::vector<DiagonalSample> samples;
    bool degenerate = false;       // no flow at all (e.g. zero vorticity)
    bool all_outflow = false;      // u1 < 0 < u2 at every sample
    bool ratios_in_interval = false;
    double implied_residual_bound = 0.0;  // max over samples of |b1|, |b2|
};

// Samples x = (t, t) with t sqrt(2) < delta.  With residual bound C the ratio
// -u1/u2 = (Lambda - b1)/(Lambda + b2) must land inside
// [(Lambda-C)/(Lambda+C), (Lambda+C)/(Lambda-C)], an interval that pinches to
// 1 as Lambda grows past C.
inline DiagonalReport diagonal_outflow_check(const Domain& dom,
                                             const std::function<double(Point2)>& omega_pos,
                                             const VelocityEvaluator& velocity, double delta,
                                             int n_samples = 5, QuadratureOptions lam_opt = {}) {
    DiagonalReport rep;
    double flow_scale = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const double t = (delta / std::sqrt(2.0)) * std::pow(0.5, k) * 0.9;
        const Point2 x{t, t};
        if (!dom.contains(x)) continue;
        const VelocitySample u = velocity(x);
        const KeyIntegralResult lam = lambda_integral(dom, omega_pos, {x}, lam_opt);
        DiagonalSample s;
        s.x = x;
        s.u1 = u.u1;
        s.u2 = u.u2;
        s.lambda = lam.lambda;
        s.outflow_ok = (u.u1 < 0.0) && (u.u2 > 0.0);
        s.ratio = (u.u2 != 0.0) ? -u.u1 / u.u2 : 0.0;
        flow_scale = std::max(flow_scale, std::max(std::fabs(u.u1), std::fabs(u.u2)) / t);
        const double b1 = u.u1 / t + lam.lambda;
        const double b2 = u.u2 / t - lam.lambda;
        rep.implied_residual_bound =
            std::max(rep.implied_residual_bound, std::max(std::fabs(b1), std::fabs(b2)));
        rep.samples.push_back(s);
    }
    if (flow_scale < 1e-12) {
        rep.degenerate = true;
        return rep;
    }
    rep.all_outflow = !rep.samples.empty();
    rep.ratios_in_interval = !rep.samples.empty();
    const double c = rep.implied_residual_bound * (1.0 + 1e-9) + 1e-12;
    for (const DiagonalSample& s : rep.samples) {
        if (!s.outflow_ok) rep.all_outflow = false;
        if (s.lambda > c) {
            const double lo = (s.lambda - c) / (s.lambda + c);
            const double hi = (s.lambda + c) / (s.lambda - c);
            if (!(s.ratio >= lo && s.ratio <= hi)) rep.ratios_in_interval = false;
        }
    }
    return rep;
}

inline DiagonalReport diagonal_outflow_check(const Domain& dom,
                                             const std::function<double(Point2)>& omega_pos,
                                             double delta, int n_samples = 5,
                                             OddVelocityOptions vel_opt = {},
                                             QuadratureOptions lam_opt = {}) {
    return diagonal_outflow_check(
        dom, omega_pos,
        [&](Point2 x) { return velocity_odd_green_adaptive(dom, omega_pos, x, vel_opt); },
        delta, n_samples, lam_opt);
}

}  // namespace ess

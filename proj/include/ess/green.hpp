// Dirichlet log-kernel for the disk (exact, via circular inversion), the
// reflected-log approximation of it valid near the tangency origin, and
// velocity evaluation by differentiating the kernel under the integral.
#pragma once

#include <functional>

#include "ess/common.hpp"
#include "ess/geometry.hpp"
#include "ess/grid.hpp"
#include "ess/quadrature.hpp"

namespace ess {

struct GreenValue {
    double g = 0.0;           // total kernel value
    double log_part = 0.0;    // (1/2pi) log|x-y|
    double image_part = 0.0;  // subtracted reflected-log term (stored with its sign)
    double remainder = 0.0;   // g_reference - (log_part + image_part) when a reference exists
};

struct VelocitySample {
    double u1 = 0.0;
    double u2 = 0.0;
    Point2 at{0.0, 0.0};
};

inline Point2 disk_center(double R) { return {0.0, R}; }

inline double log_kernel(Point2 x, Point2 y) {
    const double r = dist(x, y);
    if (r <= 0.0) throw DomainError("log kernel at coincident points");
    return std::log(r) / (2.0 * pi);
}

// g(x,y) = (1/2pi)(log|x-y| - log(|x-yhat| |y-c| / R)), yhat the circular
// inversion of y about the center; zero when x is on the circle.
inline GreenValue greens_disk_exact(double R, Point2 x, Point2 y) {
    if (R <= 0.0) throw ConfigError("disk kernel: radius must be positive");
    const Point2 c = disk_center(R);
    const double rxy = dist(x, y);
    if (rxy <= 0.0) throw DomainError("disk kernel at coincident points");
    GreenValue out;
    out.log_part = std::log(rxy) / (2.0 * pi);
    const Vec2 d = y - c;
    const double q = norm(d);
    double corr;  // |x-yhat| |y-c| / R, with the y -> c limit R
    if (q < 1e-300) {
        corr = R;
    } else {
        const Point2 yhat = c + (R * R / (q * q)) * d;
        corr = dist(x, yhat) * q / R;
    }
    out.image_part = -std::log(corr) / (2.0 * pi);
    out.g = out.log_part + out.image_part;
    out.remainder = 0.0;
    return out;
}

// Reflected-log approximation g(x,y) = (1/2pi)(log|x-y| - log|x-y*|) with y*
// the mirror of y across the boundary.  The remainder field reports the gap to
// the exact disk kernel when the domain is a disk, NaN otherwise.
inline GreenValue greens_image(const Domain& dom, Point2 x, Point2 y) {
    const double rxy = dist(x, y);
    if (rxy <= 0.0) throw DomainError("image kernel at coincident points");
    const Point2 ystar = conjugate_point(dom, y);
    GreenValue out;
    out.log_part = std::log(rxy) / (2.0 * pi);
    out.image_part = -std::log(dist(x, ystar)) / (2.0 * pi);
    out.g = out.log_part + out.image_part;
    if (dom.kind() == DomainKind::disk)
        out.remainder = greens_disk_exact(dom.radius(), x, y).g - out.g;
    else
        out.remainder = std::numeric_limits<double>::quiet_NaN();
    return out;
}

// (d2, -d1) applied to a gradient: the perpendicular gradient of the scalar.
inline Vec2 perp_of_grad(Vec2 grad) { return {grad.y, -grad.x}; }

// Perpendicular x-gradient of the exact disk kernel.
inline Vec2 green_velocity_kernel_disk(double R, Point2 x, Point2 y) {
    const Point2 c = disk_center(R);
    const Vec2 dxy = x - y;
    const double q2 = std::max(norm2(dxy), 1e-300);
    Vec2 grad = (1.0 / (2.0 * pi * q2)) * dxy;
    const Vec2 d = y - c;
    const double yq = norm2(d);
    if (yq > 1e-300) {
        const Point2 yhat = c + (R * R / yq) * d;
        const Vec2 dxh = x - yhat;
        grad = grad - (1.0 / (2.0 * pi * norm2(dxh))) * dxh;
    }
    return perp_of_grad(grad);
}

// Exterior mirror of y, defined and smooth over the whole interior.  The map
// doubles the scaled radial coordinate about the center: for the disk this is
// exactly the normal reflection, for the ellipse it matches the normal
// reflection to leading order near the tangency origin while staying smooth
// (the true closest-point map kinks along the medial axis and evolute, which
// would both slow adaptive refinement and have no accuracy benefit here: far
// from the origin any smooth exterior image differs from the exact kernel by
// a bounded remainder).
inline Point2 mirror_point_domainwide(const Domain& dom, Point2 y) {
    if (dom.kind() == DomainKind::custom) return reflect_across_boundary(dom, y);
    const double a = (dom.kind() == DomainKind::disk) ? dom.radius() : dom.semi_axis_x();
    const double b = (dom.kind() == DomainKind::disk) ? dom.radius() : dom.semi_axis_y();
    const double e1 = y.x / a;
    const double e2 = (y.y - b) / b;
    const double rho = std::max(std::hypot(e1, e2), 1e-12);
    const double scale = (2.0 - rho) / rho;
    return {a * e1 * scale, b + b * e2 * scale};
}

// Perpendicular x-gradient of the reflected-log kernel on a general domain.
inline Vec2 green_velocity_kernel_image(const Domain& dom, Point2 x, Point2 y) {
    const Point2 ystar = mirror_point_domainwide(dom, y);
    const Vec2 dxy = x - y;
    const Vec2 dxs = x - ystar;
    const Vec2 grad = (1.0 / (2.0 * pi * std::max(norm2(dxy), 1e-300))) * dxy -
                      (1.0 / (2.0 * pi * std::max(norm2(dxs), 1e-300))) * dxs;
    return perp_of_grad(grad);
}

namespace detail {

// Composite Gauss panels in r times midpoint in angle over the disk
// |y - x| <= rho; the 1/r kernel singularity is cancelled by the area factor.
template <class F>
Vec2 polar_patch_integral(Point2 x, double rho, int radial_panels, int angular, F&& kernel_times_omega) {
    Vec2 acc{0.0, 0.0};
    const double dr = rho / radial_panels;
    const double dth = 2.0 * pi / angular;
    for (int p = 0; p < radial_panels; ++p) {
        const double r0 = p * dr, r1 = r0 + dr;
        for (int gn = 0; gn < 3; ++gn) {
            const double r = 0.5 * (r0 + r1) + 0.5 * dr * gauss3_nodes[gn];
            const double wr = 0.5 * dr * gauss3_weights[gn];
            for (int a = 0; a < angular; ++a) {
                const double th = (a + 0.5) * dth;
                const Point2 y{x.x + r * std::cos(th), x.y + r * std::sin(th)};
                const Vec2 kv = kernel_times_omega(y);
                acc = acc + (wr * dth * r) * kv;
            }
        }
    }
    return acc;
}

}  // namespace detail

// Velocity at x from a gridded vorticity field on the disk of radius R:
// cell-midpoint sum of the analytic kernel gradient away from x, a subdivided
// band at the cutoff circle, and a polar patch over the singular neighborhood.
inline VelocitySample velocity_via_green_quadrature(double R, const ScalarField& omega, Point2 x) {
    const Grid& g = omega.grid;
    const double h = g.h;
    const double rho = 3.5 * h;
    const double band = 0.75 * h * 1.4142135623730951;

    Vec2 acc{0.0, 0.0};
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double w00 = omega.at(i, j), w10 = omega.at(i + 1, j);
            const double w01 = omega.at(i, j + 1), w11 = omega.at(i + 1, j + 1);
            if (w00 == 0.0 && w10 == 0.0 && w01 == 0.0 && w11 == 0.0) continue;
            const Point2 yc{g.x(i) + 0.5 * h, g.y(j) + 0.5 * h};
            const double d = dist(yc, x);
            if (d <= rho - band) continue;  // covered by the polar patch
            if (d >= rho + band) {
                const double wbar = 0.25 * (w00 + w10 + w01 + w11);
                acc = acc + (wbar * h * h) * green_velocity_kernel_disk(R, x, yc);
            } else {
                const double sh = 0.25 * h;
                for (int sj = 0; sj < 4; ++sj) {
                    for (int si = 0; si < 4; ++si) {
                        const Point2 ys{g.x(i) + (si + 0.5) * sh, g.y(j) + (sj + 0.5) * sh};
                        if (dist(ys, x) <= rho) continue;
                        acc = acc + (interp_bilinear(omega, ys) * sh * sh) *
                                        green_velocity_kernel_disk(R, x, ys);
                    }
                }
            }
        }
    }

    acc = acc + detail::polar_patch_integral(x, rho, 4, 48, [&](Point2 y) -> Vec2 {
              const double w = interp_bilinear(omega, y);
              if (w == 0.0) return {0.0, 0.0};
              return w * green_velocity_kernel_disk(R, x, y);
          });

    return {acc.x, acc.y, x};
}

struct OddVelocityOptions {
    double rel_tol = 1e-3;
    double abs_tol = 0.0;
    int max_cells = 250000;
    double min_cell = 0.0;  // 0: choose from the singular-patch radius
    double patch_fraction = 0.8;
    int patch_radial_panels = 6;
    int patch_angular = 64;
};

// Velocity at x in the open right half D+ induced by a vorticity that is odd
// in the first coordinate, given analytically by its restriction to D+.  The
// mirror half is folded into the kernel, which both removes the cancellation
// between halves and keeps the integration region one-signed.  Backend: exact
// inversion kernel on the disk, reflected-log kernel otherwise.
inline VelocitySample velocity_odd_green_adaptive(const Domain& dom,
                                                  const std::function<double(Point2)>& omega_pos,
                                                  Point2 x, OddVelocityOptions opt = {}) {
    if (!(x.x > 0.0) || !dom.contains(x))
        throw DomainError("odd velocity: sample must lie strictly inside the right half");
    const bool disk = dom.kind() == DomainKind::disk;

    auto kernel = [&](Point2 q, Point2 y) -> Vec2 {
        return disk ? green_velocity_kernel_disk(dom.radius(), q, y)
                    : green_velocity_kernel_image(dom, q, y);
    };
    auto folded = [&](Point2 y) -> Vec2 {
        const Point2 ym{-y.x, y.y};
        return kernel(x, y) - kernel(x, ym);
    };

    const double wall_dist = std::fabs(dom.signed_distance(x));
    const double rho = opt.patch_fraction * std::min(x.x, wall_dist);
    if (!(rho > 0.0)) throw DomainError("odd velocity: degenerate singular patch");

    const Box bb = dom.bounding_box();
    const Box half{0.0, bb.ylo, bb.xhi, bb.yhi};
    auto region = [&](Point2 y) {
        return y.x > 0.0 && dist(y, x) > rho && dom.contains(y);
    };

    QuadratureOptions qopt;
    qopt.rel_tol = opt.rel_tol;
    qopt.abs_tol = opt.abs_tol;
    qopt.max_cells = opt.max_cells;
    qopt.min_cell = (opt.min_cell > 0.0) ? opt.min_cell : std::max(rho / 64.0, 1e-8);

    const QuadratureResult u1 = integrate_adaptive(
        half, [&](Point2 y) { return folded(y).x * omega_pos(y); }, region, qopt);
    const QuadratureResult u2 = integrate_adaptive(
        half, [&](Point2 y) { return folded(y).y * omega_pos(y); }, region, qopt);

    const Vec2 patch = detail::polar_patch_integral(
        x, rho, opt.patch_radial_panels, opt.patch_angular, [&](Point2 y) -> Vec2 {
            if (!(y.x > 0.0) || !dom.contains(y)) return {0.0, 0.0};
            return omega_pos(y) * folded(y);
        });

    return {u1.value + patch.x, u2.value + patch.y, x};
}

}  // namespace ess

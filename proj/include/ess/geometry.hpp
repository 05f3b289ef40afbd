// Symmetric domains with a boundary graph tangent to the x-axis at the origin:
// boundary passes through (0,0) as y = f(s) with f(0) = f'(0) = 0, f(-s) = f(s),
// and the fluid region lies above the graph near the origin.  Provides closest-point
// projection onto the graph, the mirror point across the boundary, and the reflection
// Jacobian on the boundary.
#pragma once

#include <functional>
#include <optional>

#include "ess/common.hpp"

namespace ess {

enum class DomainKind { disk, ellipse, custom };

// Near-origin boundary description y = f(s), |s| < s_max, with derivatives to third order.
struct BoundaryCurve {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f;
    std::function<double(double)> d3f;
    double s_max = 0.0;
};

class Domain {
public:
    static Domain disk(double radius) {
        if (!(radius > 0.0)) throw ConfigError("disk radius must be positive");
        Domain d;
        d.kind_ = DomainKind::disk;
        d.ax_ = radius;
        d.ay_ = radius;
        d.center_ = {0.0, radius};
        d.curve_ = graph_for_ellipse(radius, radius);
        d.bbox_ = {-radius, 0.0, radius, 2.0 * radius};
        d.curvature_radius0_ = radius;
        d.validity_radius_ = 0.2 * radius;
        return d;
    }

    // Semi-axis ax along the tangent direction, ay vertical; center sits at (0, ay).
    static Domain ellipse(double ax, double ay) {
        if (!(ax > 0.0) || !(ay > 0.0)) throw ConfigError("ellipse semi-axes must be positive");
        Domain d;
        d.kind_ = DomainKind::ellipse;
        d.ax_ = ax;
        d.ay_ = ay;
        d.center_ = {0.0, ay};
        d.curve_ = graph_for_ellipse(ax, ay);
        d.bbox_ = {-ax, 0.0, ax, 2.0 * ay};
        d.curvature_radius0_ = ax * ax / ay;
        d.validity_radius_ = 0.2 * std::min(d.curvature_radius0_, ax);
        return d;
    }

    static Domain custom(BoundaryCurve curve, std::function<bool(Point2)> inside_far,
                         std::function<double(Point2)> signed_distance_far, Box bbox) {
        if (!curve.f || !curve.df || !curve.d2f || !curve.d3f || !(curve.s_max > 0.0))
            throw ConfigError("custom domain needs a complete boundary curve");
        if (!inside_far || !signed_distance_far) throw ConfigError("custom domain needs far-field membership");
        Domain d;
        d.kind_ = DomainKind::custom;
        d.curve_ = std::move(curve);
        d.inside_far_ = std::move(inside_far);
        d.sd_far_ = std::move(signed_distance_far);
        d.bbox_ = bbox;
        const double k0 = d.curve_.d2f(0.0);
        d.curvature_radius0_ = (k0 > 0.0) ? 1.0 / k0 : d.curve_.s_max;
        d.validity_radius_ = 0.2 * std::min(d.curvature_radius0_, d.curve_.s_max);
        return d;
    }

    DomainKind kind() const { return kind_; }
    const BoundaryCurve& curve() const { return curve_; }
    double s_max() const { return curve_.s_max; }
    Box bounding_box() const { return bbox_; }
    Point2 center() const { return center_; }
    double radius() const { return ax_; }
    double semi_axis_x() const { return ax_; }
    double semi_axis_y() const { return ay_; }
    double curvature_radius_origin() const { return curvature_radius0_; }

    double validity_radius() const { return validity_radius_; }
    double validity_radius_cap() const { return 0.45 * std::min(curvature_radius0_, s_max()); }
    void set_validity_radius(double r) {
        if (!(r > 0.0)) throw ConfigError("validity radius must be positive");
        validity_radius_ = r;
    }

    bool contains(Point2 p) const {
        switch (kind_) {
            case DomainKind::disk:
                return dist(p, center_) < ax_;
            case DomainKind::ellipse: {
                const double u = p.x / ax_;
                const double v = (p.y - center_.y) / ay_;
                return u * u + v * v < 1.0;
            }
            case DomainKind::custom:
                return inside_far_(p);
        }
        return false;
    }

    // Negative inside, zero on the boundary, positive outside.
    double signed_distance(Point2 p) const {
        switch (kind_) {
            case DomainKind::disk:
                return dist(p, center_) - ax_;
            case DomainKind::ellipse:
                return ellipse_signed_distance(p);
            case DomainKind::custom:
                return sd_far_(p);
        }
        return 0.0;
    }

    // Globally nearest boundary point (exact for disk and ellipse).
    Point2 closest_boundary_point(Point2 p) const {
        switch (kind_) {
            case DomainKind::disk: {
                const Vec2 d = p - center_;
                const double n = norm(d);
                if (n < 1e-300) return {0.0, 0.0};
                return center_ + (ax_ / n) * d;
            }
            case DomainKind::ellipse:
                return ellipse_closest_point(p);
            case DomainKind::custom:
                throw DomainError("custom domain: global closest point not available");
        }
        return {};
    }

private:
    static BoundaryCurve graph_for_ellipse(double ax, double ay) {
        // f(s) = ay * (1 - sqrt(1 - (s/ax)^2)); open interval |s| < ax.
        BoundaryCurve c;
        c.s_max = ax;
        c.f = [ax, ay](double s) {
            const double u = s / ax;
            return ay * (1.0 - std::sqrt(1.0 - u * u));
        };
        c.df = [ax, ay](double s) {
            const double u = s / ax;
            return ay * u / (ax * std::sqrt(1.0 - u * u));
        };
        c.d2f = [ax, ay](double s) {
            const double u = s / ax;
            const double w = 1.0 - u * u;
            return ay / (ax * ax * w * std::sqrt(w));
        };
        c.d3f = [ax, ay](double s) {
            const double u = s / ax;
            const double w = 1.0 - u * u;
            return 3.0 * ay * u / (ax * ax * ax * w * w * std::sqrt(w));
        };
        return c;
    }

    double ellipse_signed_distance(Point2 p) const {
        const Point2 cp = ellipse_closest_point(p);
        const double u = p.x / ax_;
        const double v = (p.y - center_.y) / ay_;
        const double inside = u * u + v * v - 1.0;
        const double d = dist(p, cp);
        return inside < 0.0 ? -d : d;
    }

    Point2 ellipse_closest_point(Point2 p) const {
        // Work in the centered frame, folded into the first quadrant.
        const double u = std::fabs(p.x);
        const double v = std::fabs(p.y - center_.y);
        const double a = ax_, b = ay_;
        double qx, qy;
        if (u < 1e-14 && v < 1e-14) {
            qx = 0.0;
            qy = b;
        } else if (u < 1e-14) {
            // On the minor/major vertical axis: vertex unless inside the evolute.
            const double c = (b * b - a * a) / b;
            if (b >= a || v >= std::fabs(c)) {
                qx = 0.0;
                qy = b;
            } else {
                qy = b * b * v / (b * b - a * a);
                qy = std::clamp(qy, -b, b);
                qx = a * std::sqrt(std::max(0.0, 1.0 - (qy / b) * (qy / b)));
            }
        } else if (v < 1e-14) {
            const double c = (a * a - b * b) / a;
            if (a >= b && u < c) {
                qx = a * a * u / (a * a - b * b);
                qx = std::clamp(qx, 0.0, a);
                qy = b * std::sqrt(std::max(0.0, 1.0 - (qx / a) * (qx / a)));
            } else {
                qx = a;
                qy = 0.0;
            }
        } else {
            // F(t) = (a u/(t+a^2))^2 + (b v/(t+b^2))^2 - 1 is decreasing; bisect.
            const double tmin = -std::min(a * a, b * b);
            double lo = tmin + 1e-300 + 1e-14 * std::min(a * a, b * b);
            double hi = std::max({a * u, b * v, 1.0});
            hi = hi * hi;  // generous upper bracket
            auto F = [&](double t) {
                const double ru = a * u / (t + a * a);
                const double rv = b * v / (t + b * b);
                return ru * ru + rv * rv - 1.0;
            };
            while (F(hi) > 0.0) hi *= 2.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                (F(mid) > 0.0 ? lo : hi) = mid;
            }
            const double t = 0.5 * (lo + hi);
            qx = a * a * u / (t + a * a);
            qy = b * b * v / (t + b * b);
        }
        const double sx = (p.x < 0.0) ? -1.0 : 1.0;
        const double sy = (p.y - center_.y < 0.0) ? -1.0 : 1.0;
        return {sx * qx, center_.y + sy * qy};
    }

    DomainKind kind_ = DomainKind::disk;
    double ax_ = 1.0, ay_ = 1.0;
    Point2 center_{0.0, 1.0};
    BoundaryCurve curve_;
    std::function<bool(Point2)> inside_far_;
    std::function<double(Point2)> sd_far_;
    Box bbox_{};
    double curvature_radius0_ = 1.0;
    double validity_radius_ = 0.2;
};

inline void check_curve_range(const Domain& dom, double s) {
    if (!(std::fabs(s) < dom.s_max()))
        throw DomainError("boundary parameter out of range: |s| = " + format_real(std::fabs(s)) +
                          " >= " + format_real(dom.s_max()));
}

inline double boundary_height(const Domain& dom, double s) {
    check_curve_range(dom, s);
    return dom.curve().f(s);
}
inline double boundary_slope(const Domain& dom, double s) {
    check_curve_range(dom, s);
    return dom.curve().df(s);
}
inline double boundary_second_derivative(const Domain& dom, double s) {
    check_curve_range(dom, s);
    return dom.curve().d2f(s);
}
inline double boundary_third_derivative(const Domain& dom, double s) {
    check_curve_range(dom, s);
    return dom.curve().d3f(s);
}

struct Projection {
    double s = 0.0;          // graph parameter of the nearest point
    Point2 foot{};           // (s, f(s))
    double residual = 0.0;   // |F| at the accepted root
    int iterations = 0;
    bool used_fallback = false;
};

namespace detail {

// Stationarity of |y - (s, f(s))|^2 in s, up to a factor of 2.
inline double foot_equation(const Domain& dom, double s, Point2 y) {
    const auto& c = dom.curve();
    return (s - y.x) + c.df(s) * (c.f(s) - y.y);
}

inline double foot_equation_derivative(const Domain& dom, double s, Point2 y) {
    const auto& c = dom.curve();
    const double fp = c.df(s);
    return 1.0 + c.d2f(s) * (c.f(s) - y.y) + fp * fp;
}

}  // namespace detail

// Newton solve for the nearest graph point; damped steps, coarse-search fallback.
inline Projection project_to_boundary_unchecked(const Domain& dom, Point2 y) {
    constexpr double tol = 1e-12;
    constexpr int max_iter = 50;
    const double s_lim = dom.s_max() * (1.0 - 1e-12);

    Projection out;
    auto run_newton = [&](double s0, int budget) -> std::optional<Projection> {
        double s = std::clamp(s0, -s_lim, s_lim);
        double F = detail::foot_equation(dom, s, y);
        for (int it = 1; it <= budget; ++it) {
            if (std::fabs(F) <= tol) {
                Projection p;
                p.s = s;
                p.foot = {s, dom.curve().f(s)};
                p.residual = std::fabs(F);
                p.iterations = it - 1;
                return p;
            }
            const double dF = detail::foot_equation_derivative(dom, s, y);
            if (!(std::fabs(dF) > 1e-14)) break;
            const double step = -F / dF;
            if (std::fabs(step) <= 1e-15 * std::max(1.0, std::fabs(s))) {
                // The parameter is converged to machine precision; the residual
                // cannot be reduced further where the equation is stiff (near
                // vertical tangents the derivative blows up).  Accept.
                Projection p;
                p.s = s;
                p.foot = {s, dom.curve().f(s)};
                p.residual = std::fabs(F);
                p.iterations = it;
                return p;
            }
            double lambda = 1.0;
            double s_new = s, F_new = F;
            bool accepted = false;
            for (int k = 0; k < 8; ++k) {
                s_new = std::clamp(s + lambda * step, -s_lim, s_lim);
                F_new = detail::foot_equation(dom, s_new, y);
                if (std::fabs(F_new) < std::fabs(F)) {
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!accepted) break;
            s = s_new;
            F = F_new;
        }
        if (std::fabs(F) <= tol) {
            Projection p;
            p.s = s;
            p.foot = {s, dom.curve().f(s)};
            p.residual = std::fabs(F);
            p.iterations = budget;
            return p;
        }
        return std::nullopt;
    };

    if (auto p = run_newton(y.x, max_iter)) return *p;

    // Coarse 1D scan of the squared distance, golden-section refine, then re-Newton.
    const int n_scan = 4001;
    double best_s = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_scan; ++i) {
        const double s = -s_lim + (2.0 * s_lim) * static_cast<double>(i) / (n_scan - 1);
        const double d = norm2(y - Point2{s, dom.curve().f(s)});
        if (d < best_d) {
            best_d = d;
            best_s = s;
        }
    }
    const double half_cell = (2.0 * s_lim) / (n_scan - 1);
    const double refined = golden_section_min(
        [&](double s) { return norm2(y - Point2{s, dom.curve().f(s)}); },
        std::max(-s_lim, best_s - half_cell), std::min(s_lim, best_s + half_cell));
    if (auto p = run_newton(refined, max_iter)) {
        p->used_fallback = true;
        return *p;
    }
    throw SolverError("project_to_boundary: Newton stalled at |F| > 1e-12");
}

inline Projection project_to_boundary(const Domain& dom, Point2 y) {
    if (!dom.contains(y)) throw DomainError("project_to_boundary: point outside the domain");
    if (!(norm(y) <= 2.0 * dom.validity_radius()))
        throw DomainError("project_to_boundary: point outside the near-origin validity ball");
    return project_to_boundary_unchecked(dom, y);
}

// Mirror point across the boundary through the nearest graph point: y* = 2 e(y) - y.
inline Point2 reflect_across_boundary(const Domain& dom, Point2 y) {
    const Projection p = project_to_boundary_unchecked(dom, y);
    return 2.0 * p.foot - y;
}

inline Point2 conjugate_point(const Domain& dom, Point2 y) {
    if (!dom.contains(y)) throw DomainError("conjugate_point: point outside the domain");
    if (!(norm(y) <= dom.validity_radius()))
        throw DomainError("conjugate_point: point outside the near-origin validity ball");
    return reflect_across_boundary(dom, y);
}

// Derivative of the mirror map at the boundary point (s0, f(s0)): a symmetric
// orthogonal reflection with determinant -1.
inline Mat2 conjugate_jacobian(const Domain& dom, double s0) {
    if (!(std::fabs(s0) <= 2.0 * dom.validity_radius()))
        throw DomainError("conjugate_jacobian: parameter outside the near-origin validity range");
    check_curve_range(dom, s0);
    const double t = dom.curve().df(s0);
    const double d = 1.0 + t * t;
    return {(1.0 - t * t) / d, 2.0 * t / d, 2.0 * t / d, (t * t - 1.0) / d};
}

}  // namespace ess

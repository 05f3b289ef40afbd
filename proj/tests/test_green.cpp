#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <random>

#include "ess/green.hpp"
#include "ess/grid.hpp"
#include "support.hpp"

using namespace ess;

namespace {

Point2 disk_conjugate_closed_form(double R, Point2 y) {
    const Point2 c = disk_center(R);
    const Vec2 d = y - c;
    const Point2 foot = c + (R / norm(d)) * d;
    return 2.0 * foot - y;
}

}  // namespace

TEST_CASE("exact disk kernel: frozen value, boundary zero, symmetry") {
    const double R = 1.0;
    const GreenValue gv = greens_disk_exact(R, {0.0, 0.5}, {0.0, 1.5});
    CHECK(std::fabs(gv.g - (-0.035514399210736486)) < 1e-13);
    CHECK(std::fabs(gv.log_part) < 1e-15);  // |x-y| = 1
    CHECK(std::fabs(gv.g - (gv.log_part + gv.image_part)) < 1e-15);
    CHECK(gv.remainder == 0.0);

    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
    std::uniform_real_distribution<double> rad(0.05, 0.9);
    const Point2 c = disk_center(R);
    for (int k = 0; k < 200; ++k) {
        const double ty = ang(rng), ry = rad(rng);
        const Point2 y{c.x + ry * std::cos(ty), c.y + ry * std::sin(ty)};
        // Dirichlet: kernel vanishes with the first argument on the circle.
        const double tb = ang(rng);
        const Point2 xb{c.x + R * std::cos(tb), c.y + R * std::sin(tb)};
        CHECK(std::fabs(greens_disk_exact(R, xb, y).g) < 1e-12);
        // Symmetry in the two arguments.
        const double tx = ang(rng), rx = rad(rng);
        const Point2 x{c.x + rx * std::cos(tx), c.y + rx * std::sin(tx)};
        if (dist(x, y) < 1e-6) continue;
        CHECK(std::fabs(greens_disk_exact(R, x, y).g - greens_disk_exact(R, y, x).g) < 1e-12);
    }

    // Second argument at the center: inversion degenerates to the log of the
    // scaled distance.
    const GreenValue at_center = greens_disk_exact(R, {0.3, 0.8}, c);
    const double expect = std::log(dist(Point2{0.3, 0.8}, c) / R) / (2.0 * pi);
    CHECK(std::fabs(at_center.g - expect) < 1e-14);

    CHECK_THROWS_AS(greens_disk_exact(R, {0.1, 0.2}, {0.1, 0.2}), DomainError);
    CHECK_THROWS_AS(greens_disk_exact(-1.0, {0.1, 0.2}, {0.3, 0.2}), ConfigError);
}

TEST_CASE("reflected-log kernel: closed-form mirror agreement and finite gap on the disk") {
    const Domain disk = Domain::disk(1.0);
    const Point2 x{0.02, 0.01}, y{0.05, 0.02};

    const GreenValue gi = greens_image(disk, x, y);
    const Point2 ystar = disk_conjugate_closed_form(1.0, y);
    const double direct = (std::log(dist(x, y)) - std::log(dist(x, ystar))) / (2.0 * pi);
    CHECK(std::fabs(gi.g - direct) < 1e-9);
    CHECK(std::isfinite(gi.remainder));
    CHECK(std::fabs(gi.remainder) < 1.0);
    CHECK(std::fabs(greens_disk_exact(1.0, x, y).g - (gi.g + gi.remainder)) < 1e-12);
}

TEST_CASE("reflected-log kernel on the boundary is the log-distance ratio") {
    Domain disk = Domain::disk(1.0);
    std::mt19937_64 rng(72);
    for (int k = 0; k < 20; ++k) {
        const Point2 y = ess_test::sample_near_origin(disk, rng, 0.18);
        const double s = -0.15 + 0.3 * (k / 19.0);
        const Point2 xb{s, boundary_height(disk, s)};
        if (dist(xb, y) < 1e-4) continue;
        const GreenValue gi = greens_image(disk, xb, y);
        const Point2 ystar = disk_conjugate_closed_form(1.0, y);
        const double ratio = -std::log(dist(xb, ystar) / dist(xb, y)) / (2.0 * pi);
        CHECK(std::fabs(gi.g - ratio) < 1e-9);
        CHECK(std::isfinite(gi.g));
    }
}

TEST_CASE("reflected-log kernel keeps only the near-log singularity") {
    const Domain disk = Domain::disk(1.0);
    const Point2 y{0.04, 0.03};
    // g(y + (h,0)) - g(y + (h/2,0)) tends to (1/2pi) log 2: the image term is smooth.
    const double h = 1e-4;
    const double g1 = greens_image(disk, {y.x + h, y.y}, y).g;
    const double g2 = greens_image(disk, {y.x + 0.5 * h, y.y}, y).g;
    CHECK(std::fabs((g2 - g1) - (-0.1103178000763258)) < 1e-3);
}

TEST_CASE("domain-wide mirror: exact on the disk, exterior and near-normal on the ellipse") {
    const Domain disk = Domain::disk(1.0);
    const Domain ell = Domain::ellipse(0.4, 0.3);
    std::mt19937_64 rng(70);
    for (int k = 0; k < 300; ++k) {
        const Point2 yd = ess_test::sample_near_origin(disk, rng, 0.45);
        const Point2 md = mirror_point_domainwide(disk, yd);
        CHECK(dist(md, disk_conjugate_closed_form(1.0, yd)) < 1e-12);

        const Point2 ye = ess_test::sample_near_origin(ell, rng, 0.12);
        const Point2 me = mirror_point_domainwide(ell, ye);
        CHECK_FALSE(ell.contains(me));
    }
    // Near the tangency origin the smooth mirror tracks the normal reflection.
    for (const double s : {0.02, 0.05, -0.04}) {
        const Point2 y{s, boundary_height(ell, s) + 0.01};
        const Point2 m_smooth = mirror_point_domainwide(ell, y);
        const Point2 m_normal = reflect_across_boundary(ell, y);
        CHECK(dist(m_smooth, m_normal) < 0.15 * dist(y, m_normal));
    }
}

TEST_CASE("velocity kernels are the perpendicular gradients of the scalar kernels") {
    const Domain ell = Domain::ellipse(0.4, 0.3);
    std::mt19937_64 rng(73);

    for (int k = 0; k < 25; ++k) {
        const Point2 x = ess_test::sample_near_origin(ell, rng, 0.06);
        const Point2 y = ess_test::sample_near_origin(ell, rng, 0.06);
        if (dist(x, y) < 5e-3) continue;

        const Vec2 kd = green_velocity_kernel_disk(1.0, x, y);
        auto gd1 = [&](double t) { return greens_disk_exact(1.0, {t, x.y}, y).g; };
        auto gd2 = [&](double t) { return greens_disk_exact(1.0, {x.x, t}, y).g; };
        const double d1 = ess_test::fd_derivative(gd1, x.x, 1e-6);
        const double d2 = ess_test::fd_derivative(gd2, x.y, 1e-6);
        CHECK(std::fabs(kd.x - d2) < 1e-5 * std::max(1.0, std::fabs(d2)));
        CHECK(std::fabs(kd.y - (-d1)) < 1e-5 * std::max(1.0, std::fabs(d1)));

        const Vec2 ki = green_velocity_kernel_image(ell, x, y);
        const Point2 ystar = mirror_point_domainwide(ell, y);
        auto pot = [&](Point2 q) {
            return (std::log(dist(q, y)) - std::log(dist(q, ystar))) / (2.0 * pi);
        };
        auto gi1 = [&](double t) { return pot({t, x.y}); };
        auto gi2 = [&](double t) { return pot({x.x, t}); };
        const double e1 = ess_test::fd_derivative(gi1, x.x, 1e-6);
        const double e2 = ess_test::fd_derivative(gi2, x.y, 1e-6);
        CHECK(std::fabs(ki.x - e2) < 1e-5 * std::max(1.0, std::fabs(e2)));
        CHECK(std::fabs(ki.y - (-e1)) < 1e-5 * std::max(1.0, std::fabs(e1)));
    }
}

TEST_CASE("grid velocity quadrature: zero data and radial data") {
    const double R = 1.0;
    const Domain disk = Domain::disk(R);
    const Grid g = Grid::cover(disk.bounding_box(), 256);

    const ScalarField zero(g);
    const VelocitySample uz = velocity_via_green_quadrature(R, zero, {0.3, 0.9});
    CHECK(uz.u1 == 0.0);
    CHECK(uz.u2 == 0.0);

    // Radial vorticity about the disk center: the flow is purely azimuthal,
    // clockwise for positive data, with speed set by the enclosed integral.
    const Point2 c = disk_center(R);
    auto omega_fn = [&](Point2 p) { return std::exp(-4.0 * norm2(p - c)); };
    const ScalarField omega = ScalarField::sample_masked(g, disk, omega_fn);

    for (const double r : {0.35, 0.6}) {
        for (const double phi : {0.3, 2.0, 4.4}) {
            const Point2 x{c.x + r * std::cos(phi), c.y + r * std::sin(phi)};
            const VelocitySample u = velocity_via_green_quadrature(R, omega, x);
            const Vec2 uhat{u.u1, u.u2};
            const Vec2 rhat = (1.0 / r) * (x - c);
            const Vec2 that{-rhat.y, rhat.x};  // counterclockwise tangent
            const double enclosed = 0.25 * pi * (1.0 - std::exp(-4.0 * r * r));
            const double expect_tangential = -enclosed / (2.0 * pi * r);
            const double radial = dot(uhat, rhat);
            const double tangential = dot(uhat, that);
            CHECK(std::fabs(tangential - expect_tangential) <
                  0.01 * std::fabs(expect_tangential));
            CHECK(std::fabs(radial) < 0.01 * std::fabs(expect_tangential));
        }
    }
}

TEST_CASE("grid velocity quadrature respects odd symmetry on the axis") {
    const double R = 1.0;
    const Domain disk = Domain::disk(R);
    const Grid g = Grid::cover(disk.bounding_box(), 256);
    auto omega_fn = [&](Point2 p) { return (p.x > 0.0) ? 1.0 : (p.x < 0.0 ? -1.0 : 0.0); };
    const ScalarField omega = ScalarField::sample_masked(g, disk, omega_fn);

    for (const double y2 : {0.3, 0.9, 1.5}) {
        const VelocitySample u = velocity_via_green_quadrature(R, omega, {0.0, y2});
        CHECK(std::fabs(u.u1) < 2e-3);
    }
}

TEST_CASE("folded adaptive velocity agrees with the grid quadrature backend") {
    const double R = 1.0;
    const Domain disk = Domain::disk(R);
    const Grid g = Grid::cover(disk.bounding_box(), 256);
    auto sign_fn = [](Point2 p) { return (p.x > 0.0) ? 1.0 : (p.x < 0.0 ? -1.0 : 0.0); };
    const ScalarField omega = ScalarField::sample_masked(g, disk, sign_fn);
    auto one = [](Point2) { return 1.0; };

    for (const Point2 x : {Point2{0.3, 0.4}, Point2{0.15, 0.9}, Point2{0.45, 1.3}}) {
        const VelocitySample ug = velocity_via_green_quadrature(R, omega, x);
        const VelocitySample ua = velocity_odd_green_adaptive(disk, one, x);
        const double scale = std::hypot(ua.u1, ua.u2);
        REQUIRE(scale > 1e-3);
        CHECK(std::fabs(ug.u1 - ua.u1) < 0.02 * scale);
        CHECK(std::fabs(ug.u2 - ua.u2) < 0.02 * scale);
    }
}

TEST_CASE("folded adaptive velocity: near-origin behavior and determinism") {
    const Domain disk = Domain::disk(1.0);
    auto one = [](Point2) { return 1.0; };

    const double r = std::pow(2.0, -6);
    const Point2 x{r * std::cos(0.05), r * std::sin(0.05)};
    const VelocitySample u = velocity_odd_green_adaptive(disk, one, x);
    CHECK(u.u1 < 0.0);  // inflow along the wall toward the tangency point
    CHECK(std::isfinite(u.u2));

    OddVelocityOptions fine;
    fine.rel_tol = 3e-4;
    const VelocitySample uf = velocity_odd_green_adaptive(disk, one, x, fine);
    CHECK(std::fabs(u.u1 - uf.u1) < 7e-3 * std::fabs(uf.u1));

    const VelocitySample u2 = velocity_odd_green_adaptive(disk, one, x);
    CHECK(u.u1 == u2.u1);
    CHECK(u.u2 == u2.u2);

    CHECK_THROWS_AS(velocity_odd_green_adaptive(disk, one, {-0.1, 0.4}), DomainError);
}

TEST_CASE("folded adaptive velocity on the ellipse via the reflected-log kernel") {
    const Domain ell = Domain::ellipse(0.4, 0.3);
    auto one = [](Point2) { return 1.0; };
    const Point2 x{0.05, 0.03};
    const VelocitySample u = velocity_odd_green_adaptive(ell, one, x);
    CHECK(std::isfinite(u.u1));
    CHECK(std::isfinite(u.u2));
    const VelocitySample v = velocity_odd_green_adaptive(ell, one, x);
    CHECK(u.u1 == v.u1);
    CHECK(u.u2 == v.u2);
}

TEST_CASE("cubic interpolation: quadratic exactness and derivative accuracy") {
    auto quad = [](Point2 p) { return 1.5 - 0.7 * p.x + 0.3 * p.y + 0.25 * p.x * p.x -
                                      0.4 * p.x * p.y + 0.1 * p.y * p.y; };
    Grid g;
    g.x0 = -1.0;
    g.y0 = 0.0;
    g.h = 0.05;
    g.nx = 41;
    g.ny = 41;
    const ScalarField f = ScalarField::sample(g, quad);
    std::mt19937_64 rng(74);
    std::uniform_real_distribution<double> ux(-0.8, 0.8), uy(0.2, 1.8);
    for (int k = 0; k < 200; ++k) {
        const Point2 p{ux(rng), uy(rng)};
        const InterpValue iv = interp_bicubic(f, p);
        CHECK(std::fabs(iv.value - quad(p)) < 1e-12);
        CHECK(std::fabs(iv.ddx - (-0.7 + 0.5 * p.x - 0.4 * p.y)) < 1e-10);
        CHECK(std::fabs(iv.ddy - (0.3 - 0.4 * p.x + 0.2 * p.y)) < 1e-10);
    }

    // Smooth non-polynomial data: third-order value error, second-order slopes.
    auto smooth = [](Point2 p) { return std::sin(2.0 * p.x) * std::cos(1.5 * p.y); };
    auto max_err = [&](double h) {
        Grid gh;
        gh.x0 = -1.0;
        gh.y0 = 0.0;
        gh.h = h;
        gh.nx = static_cast<int>(std::lround(2.0 / h)) + 1;
        gh.ny = gh.nx;
        const ScalarField fh = ScalarField::sample(gh, smooth);
        double ev = 0.0, ed = 0.0;
        std::mt19937_64 r2(75);
        std::uniform_real_distribution<double> q(-0.7, 0.7);
        for (int k = 0; k < 300; ++k) {
            const Point2 p{q(r2), 1.0 + q(r2)};
            const InterpValue iv = interp_bicubic(fh, p);
            ev = std::max(ev, std::fabs(iv.value - smooth(p)));
            const double dx = 2.0 * std::cos(2.0 * p.x) * std::cos(1.5 * p.y);
            ed = std::max(ed, std::fabs(iv.ddx - dx));
        }
        return std::pair<double, double>{ev, ed};
    };
    const auto [ev1, ed1] = max_err(0.1);
    const auto [ev2, ed2] = max_err(0.05);
    CHECK(ev1 / ev2 > 6.0);
    CHECK(ed1 / ed2 > 3.2);
}

TEST_CASE("clamped interpolation never overshoots the stencil range") {
    Grid g;
    g.x0 = 0.0;
    g.y0 = 0.0;
    g.h = 1.0;
    g.nx = 8;
    g.ny = 8;
    ScalarField f(g);
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) f.at(i, j) = (i >= 4) ? 1.0 : 0.0;  // sharp step
    for (double t = 3.05; t < 5.0; t += 0.1) {
        const InterpValue iv = interp_bicubic(f, {t, 3.5}, true);
        CHECK(iv.value >= 0.0);
        CHECK(iv.value <= 1.0);
    }
}

TEST_CASE("odd resymmetrization and defect measurement") {
    Grid g;
    g.x0 = -0.5;
    g.y0 = 0.0;
    g.h = 0.25;
    g.nx = 5;
    g.ny = 3;
    REQUIRE(g.symmetric_in_x());
    ScalarField f = ScalarField::sample(g, [](Point2 p) { return p.x + 0.01 * p.y; });
    CHECK(odd_defect(f) > 0.0);
    resymmetrize_odd(f);
    CHECK(odd_defect(f) == 0.0);
    // The x-odd part of x + c*y is x itself.
    CHECK(std::fabs(f.at(0, 1) - (-0.5)) < 1e-15);
    CHECK(std::fabs(f.at(4, 1) - 0.5) < 1e-15);
    CHECK(f.at(2, 1) == 0.0);
}

TEST_CASE("mirror ghost fill supports interpolation across the wall") {
    const Domain disk = Domain::disk(1.0);
    const Grid g = Grid::cover(disk.bounding_box(), 128);
    // Odd-extended data: distance-to-wall, vanishing on the circle.
    ScalarField f = ScalarField::sample_masked(
        g, disk, [&](Point2 p) { return -disk.signed_distance(p); });
    fill_mirror_ghosts(f, disk, Extension::odd);
    for (const double s : {-0.4, -0.1, 0.2, 0.5}) {
        const Point2 bp{s, boundary_height(disk, s)};
        const InterpValue iv = interp_bicubic(f, bp);
        CHECK(std::fabs(iv.value) < 6.0 * g.h * g.h);
    }

    ScalarField c1 = ScalarField::sample_masked(g, disk, [](Point2) { return 1.0; });
    fill_mirror_ghosts(c1, disk, Extension::even);
    const Point2 nb{0.3, boundary_height(disk, 0.3) + 0.5 * g.h};
    CHECK(std::fabs(interp_bicubic(c1, nb).value - 1.0) < 0.05);
}

TEST_CASE("binary field dump round-trips bit-exactly") {
    Grid g;
    g.x0 = -0.4;
    g.y0 = 0.0;
    g.h = 0.013;
    g.nx = 17;
    g.ny = 11;
    const ScalarField f =
        ScalarField::sample(g, [](Point2 p) { return std::sin(31.0 * p.x) + p.y / 7.0; });
    const std::string path = "test_green_field_roundtrip.essbin";
    write_field_binary(f, path);
    const ScalarField r = read_field_binary(path);
    REQUIRE(r.grid.nx == g.nx);
    REQUIRE(r.grid.ny == g.ny);
    CHECK(r.grid.h == g.h);
    CHECK(r.grid.x0 == g.x0);
    CHECK(r.grid.y0 == g.y0);
    CHECK(r.v == f.v);
    std::remove(path.c_str());
}

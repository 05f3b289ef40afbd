#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ess/geometry.hpp"
#include "ess/quadrature.hpp"

using namespace ess;

TEST_CASE("smooth separable integrand over a box") {
    const Box b{0.0, 0.0, 1.0, 1.0};
    const auto r = integrate_adaptive_box(b, [](Point2 p) { return std::sin(p.x) * std::cos(p.y); },
                                          {.rel_tol = 1e-10});
    const double exact = (1.0 - std::cos(1.0)) * std::sin(1.0);
    REQUIRE(r.converged);
    CHECK(std::fabs(r.value - exact) < 1e-9);
}

TEST_CASE("quadrant kernel closed form on the unit-offset box") {
    // Frozen reference: quarter log of 25/16.
    const double frozen = 0.11157177565710487;
    CHECK(std::fabs(quadrant_kernel_box_integral(1.0, 2.0, 1.0, 2.0) - frozen) < 1e-15);
    CHECK(std::fabs(0.25 * std::log(25.0 / 16.0) - frozen) < 1e-16);

    const auto r = integrate_adaptive_box(Box{1.0, 1.0, 2.0, 2.0}, quadrant_kernel, {.rel_tol = 1e-10});
    REQUIRE(r.converged);
    CHECK(std::fabs(r.value - frozen) < 1e-8);
}

TEST_CASE("quadrant kernel closed form matches quadrature on asymmetric boxes") {
    for (auto [a, b, c, d] : {std::array<double, 4>{0.5, 2.5, 0.25, 1.0},
                              std::array<double, 4>{0.01, 0.1, 0.02, 0.3},
                              std::array<double, 4>{1.0, 1.5, 3.0, 4.0}}) {
        const auto r = integrate_adaptive_box(Box{a, c, b, d}, quadrant_kernel, {.rel_tol = 1e-9});
        REQUIRE(r.converged);
        const double exact = quadrant_kernel_box_integral(a, b, c, d);
        CHECK(std::fabs(r.value - exact) <= 1e-8 * std::max(1.0, std::fabs(exact)));
    }
}

TEST_CASE("region-clipped integration: area of the tangent disk") {
    const Domain disk = Domain::disk(1.0);
    const auto r = integrate_adaptive(
        disk.bounding_box(), [](Point2) { return 1.0; },
        [&](Point2 p) { return disk.contains(p); }, {.rel_tol = 1e-6, .max_cells = 400000});
    CHECK(std::fabs(r.value - pi) < 2e-5);
}

TEST_CASE("integrable corner singularity") {
    // 1/|y| over the unit square: 2*log(1+sqrt(2)) plus nothing else.
    const double exact = 2.0 * std::log(1.0 + std::sqrt(2.0));
    const auto r = integrate_adaptive_box(
        Box{0.0, 0.0, 1.0, 1.0}, [](Point2 p) { return 1.0 / std::max(norm(p), 1e-300); },
        {.rel_tol = 1e-6, .max_cells = 600000, .min_cell = 1e-9});
    CHECK(std::fabs(r.value - exact) < 2e-4);
}

TEST_CASE("linearity and determinism of the adaptive engine") {
    const Box b{0.2, 0.1, 1.7, 2.3};
    auto f = [](Point2 p) { return std::exp(-p.x) * (1.0 + p.y * p.y); };
    const auto r1 = integrate_adaptive_box(b, f, {.rel_tol = 1e-8});
    const auto r2 = integrate_adaptive_box(b, f, {.rel_tol = 1e-8});
    CHECK(r1.value == r2.value);
    CHECK(r1.cells == r2.cells);

    const auto r3 = integrate_adaptive_box(b, [&](Point2 p) { return 3.0 * f(p); }, {.rel_tol = 1e-8});
    CHECK(std::fabs(r3.value - 3.0 * r1.value) < 1e-12 * std::fabs(r3.value));
}

TEST_CASE("budget exhaustion is reported, not hidden") {
    const auto r = integrate_adaptive_box(
        Box{0.0, 0.0, 1.0, 1.0}, [](Point2 p) { return 1.0 / std::max(norm(p), 1e-300); },
        {.rel_tol = 1e-14, .max_cells = 2000});
    CHECK_FALSE(r.converged);
    CHECK(r.cells >= 2000);
}

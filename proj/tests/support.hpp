#pragma once

#include <random>

#include "ess/common.hpp"
#include "ess/geometry.hpp"

namespace ess_test {

// Deterministic interior samples within |y| <= radius_cap of the origin.
inline ess::Point2 sample_near_origin(const ess::Domain& dom, std::mt19937_64& rng, double radius_cap) {
    std::uniform_real_distribution<double> ur(-radius_cap, radius_cap);
    for (int k = 0; k < 100000; ++k) {
        ess::Point2 p{ur(rng), ur(rng)};
        if (p.y <= 0.0) continue;
        if (ess::norm(p) > radius_cap) continue;
        if (!dom.contains(p)) continue;
        return p;
    }
    throw std::runtime_error("sample_near_origin: rejection sampling failed");
}

// Fourth-order central difference of a scalar function of one variable.
template <class F>
double fd_derivative(F&& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}

}  // namespace ess_test

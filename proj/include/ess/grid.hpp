// Uniform node-centered grids over a domain's bounding box, scalar fields on
// them, cubic interpolation with analytic derivatives, mirror ghost extension,
// odd-symmetry enforcement, and the on-disk field formats.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>

#include "ess/common.hpp"
#include "ess/geometry.hpp"

namespace ess {

struct Grid {
    double x0 = 0.0, y0 = 0.0;
    double h = 1.0;
    int nx = 0, ny = 0;

    double x(int i) const { return x0 + h * i; }
    double y(int j) const { return y0 + h * j; }
    Point2 at(int i, int j) const { return {x(i), y(j)}; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    int mirror_i(int i) const { return nx - 1 - i; }
    bool symmetric_in_x() const {
        return (nx % 2 == 1) && std::fabs(x0 + x(nx - 1)) < 1e-12 * std::max(1.0, h * nx);
    }

    // n cells across the box width; the node count is odd so x = 0 is a node
    // column whenever the box is symmetric.
    static Grid cover(const Box& bb, int n_cells) {
        if (n_cells < 8) throw ConfigError("grid: need at least 8 cells across");
        Grid g;
        g.h = bb.width() / n_cells;
        g.x0 = bb.xlo;
        g.y0 = bb.ylo;
        g.nx = n_cells + 1;
        g.ny = static_cast<int>(std::ceil(bb.height() / g.h - 1e-12)) + 1;
        return g;
    }
};

struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid(g), v(g.size(), 0.0) {}

    double& at(int i, int j) { return v[grid.index(i, j)]; }
    double at(int i, int j) const { return v[grid.index(i, j)]; }

    template <class F>
    static ScalarField sample(const Grid& g, F&& f) {
        ScalarField s(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) s.at(i, j) = f(g.at(i, j));
        return s;
    }

    template <class F>
    static ScalarField sample_masked(const Grid& g, const Domain& dom, F&& f) {
        ScalarField s(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const Point2 p = g.at(i, j);
                s.at(i, j) = dom.contains(p) ? f(p) : 0.0;
            }
        return s;
    }
};

struct InterpValue {
    double value = 0.0;
    double ddx = 0.0;
    double ddy = 0.0;
};

namespace detail {

// Catmull-Rom weights for samples at local offsets {-1, 0, 1, 2}, u in [0, 1].
inline void cubic_weights(double u, double w[4], double dw[4]) {
    const double u2 = u * u, u3 = u2 * u;
    w[0] = -0.5 * u3 + u2 - 0.5 * u;
    w[1] = 1.5 * u3 - 2.5 * u2 + 1.0;
    w[2] = -1.5 * u3 + 2.0 * u2 + 0.5 * u;
    w[3] = 0.5 * u3 - 0.5 * u2;
    dw[0] = -1.5 * u2 + 2.0 * u - 0.5;
    dw[1] = 4.5 * u2 - 5.0 * u;
    dw[2] = -4.5 * u2 + 4.0 * u + 0.5;
    dw[3] = 1.5 * u2 - u;
}

}  // namespace detail

// C1 cubic interpolation with analytic first derivatives.  Stencil rows and
// columns are clamped at the array edge (edge replication).
inline InterpValue interp_bicubic(const ScalarField& f, Point2 p, bool clamp_to_stencil = false) {
    const Grid& g = f.grid;
    const double gx = (p.x - g.x0) / g.h;
    const double gy = (p.y - g.y0) / g.h;
    int i0 = static_cast<int>(std::floor(gx));
    int j0 = static_cast<int>(std::floor(gy));
    i0 = std::clamp(i0, 0, g.nx - 2);
    j0 = std::clamp(j0, 0, g.ny - 2);
    const double u = std::clamp(gx - i0, 0.0, 1.0);
    const double w = std::clamp(gy - j0, 0.0, 1.0);

    double wu[4], dwu[4], wv[4], dwv[4];
    detail::cubic_weights(u, wu, dwu);
    detail::cubic_weights(w, wv, dwv);

    double col_val[4], col_ddx[4];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int jj = 0; jj < 4; ++jj) {
        const int j = std::clamp(j0 - 1 + jj, 0, g.ny - 1);
        double s = 0.0, sd = 0.0;
        for (int ii = 0; ii < 4; ++ii) {
            const int i = std::clamp(i0 - 1 + ii, 0, g.nx - 1);
            const double fv = f.at(i, j);
            s += wu[ii] * fv;
            sd += dwu[ii] * fv;
            if (clamp_to_stencil) {
                lo = std::min(lo, fv);
                hi = std::max(hi, fv);
            }
        }
        col_val[jj] = s;
        col_ddx[jj] = sd;
    }

    InterpValue out;
    for (int jj = 0; jj < 4; ++jj) {
        out.value += wv[jj] * col_val[jj];
        out.ddx += wv[jj] * col_ddx[jj];
        out.ddy += dwv[jj] * col_val[jj];
    }
    out.ddx /= g.h;
    out.ddy /= g.h;
    if (clamp_to_stencil) out.value = std::clamp(out.value, lo, hi);
    return out;
}

// Plain bilinear sample (value only), with the query clamped to the grid.
inline double interp_bilinear(const ScalarField& f, Point2 p) {
    const Grid& g = f.grid;
    const double gx = std::clamp((p.x - g.x0) / g.h, 0.0, g.nx - 1.000001);
    const double gy = std::clamp((p.y - g.y0) / g.h, 0.0, g.ny - 1.000001);
    const int i0 = static_cast<int>(gx);
    const int j0 = static_cast<int>(gy);
    const double u = gx - i0, w = gy - j0;
    return (1 - u) * (1 - w) * f.at(i0, j0) + u * (1 - w) * f.at(i0 + 1, j0) +
           (1 - u) * w * f.at(i0, j0 + 1) + u * w * f.at(i0 + 1, j0 + 1);
}

enum class Extension { odd, even };

// Populate nodes just outside the domain by reflection across the boundary:
// odd for Dirichlet stream data, even for transported quantities.  The probe
// point is pushed far enough inside that its interpolation cell is fully
// interior, and for odd data the value is rescaled by the depth ratio so the
// extension stays linear across the wall.
inline void fill_mirror_ghosts(ScalarField& f, const Domain& dom, Extension ext, int band = 3) {
    const Grid& g = f.grid;
    std::vector<std::uint8_t> inside(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) inside[g.index(i, j)] = dom.contains(g.at(i, j)) ? 1 : 0;

    auto cell_fully_inside = [&](Point2 p) -> bool {
        const double gx = (p.x - g.x0) / g.h;
        const double gy = (p.y - g.y0) / g.h;
        const int i0 = static_cast<int>(std::floor(gx));
        const int j0 = static_cast<int>(std::floor(gy));
        if (i0 < 0 || j0 < 0 || i0 + 1 >= g.nx || j0 + 1 >= g.ny) return false;
        return inside[g.index(i0, j0)] && inside[g.index(i0 + 1, j0)] &&
               inside[g.index(i0, j0 + 1)] && inside[g.index(i0 + 1, j0 + 1)];
    };

    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (inside[g.index(i, j)]) continue;
            bool near = false;
            for (int dj = -band; dj <= band && !near; ++dj) {
                for (int di = -band; di <= band && !near; ++di) {
                    const int ii = i + di, jj = j + dj;
                    if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
                    if (inside[g.index(ii, jj)]) near = true;
                }
            }
            if (!near) continue;
            const Point2 z = g.at(i, j);
            double val = 0.0;
            bool ok = false;
            if (dom.kind() != DomainKind::custom) {
                const Point2 foot = dom.closest_boundary_point(z);
                const double d_out = dist(z, foot);
                if (d_out > 1e-12) {
                    const Vec2 into = (1.0 / d_out) * (foot - z);
                    double depth = std::max(2.5 * g.h, d_out);
                    for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
                        const Point2 probe = foot + depth * into;
                        if (cell_fully_inside(probe)) {
                            const double pv = interp_bilinear(f, probe);
                            val = (ext == Extension::odd) ? -(d_out / depth) * pv : pv;
                            ok = true;
                        }
                        depth += g.h;
                    }
                }
            }
            if (!ok) {
                // Nearest interior node in the search band (deterministic scan order).
                double best = std::numeric_limits<double>::infinity();
                for (int dj = -band; dj <= band; ++dj) {
                    for (int di = -band; di <= band; ++di) {
                        const int ii = i + di, jj = j + dj;
                        if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
                        if (!inside[g.index(ii, jj)]) continue;
                        const double d2 = double(di) * di + double(dj) * dj;
                        if (d2 < best) {
                            best = d2;
                            val = f.at(ii, jj);
                        }
                    }
                }
                if (best < std::numeric_limits<double>::infinity()) {
                    ok = true;
                    if (ext == Extension::odd) val = -val;
                }
            }
            if (ok) f.at(i, j) = val;
        }
    }
}

// Exact odd part about the x = 0 node column.
inline void resymmetrize_odd(ScalarField& f) {
    const Grid& g = f.grid;
    if (!g.symmetric_in_x()) throw DomainError("resymmetrize_odd: grid is not symmetric in x");
    const int mid = (g.nx - 1) / 2;
    for (int j = 0; j < g.ny; ++j) {
        f.at(mid, j) = 0.0;
        for (int i = 0; i < mid; ++i) {
            const double a = f.at(i, j);
            const double b = f.at(g.mirror_i(i), j);
            const double odd = 0.5 * (a - b);
            f.at(i, j) = odd;
            f.at(g.mirror_i(i), j) = -odd;
        }
    }
}

inline double odd_defect(const ScalarField& f) {
    const Grid& g = f.grid;
    if (!g.symmetric_in_x()) throw DomainError("odd_defect: grid is not symmetric in x");
    double worst = 0.0;
    const int mid = (g.nx - 1) / 2;
    for (int j = 0; j < g.ny; ++j) {
        worst = std::max(worst, std::fabs(f.at(mid, j)));
        for (int i = 0; i < mid; ++i)
            worst = std::max(worst, std::fabs(f.at(i, j) + f.at(g.mirror_i(i), j)));
    }
    return worst;
}

// Midpoint cell sum restricted to a node predicate (used for conservation drift).
template <class Pred>
double masked_node_sum(const ScalarField& f, Pred&& keep) {
    const Grid& g = f.grid;
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (keep(g.at(i, j))) acc += f.at(i, j);
    return acc * g.h * g.h;
}

// Square-cell grid whose box extends three cells beyond the domain's bounding
// box on every side, so interpolation stencils and the one-cell velocity
// margin never collide with the box edge for points inside the domain.  The
// cell size equals bounding-box width / n_cells exactly.
inline Grid make_domain_grid(const Domain& dom, int n_cells) {
    const Box bb = dom.bounding_box();
    const double h = bb.width() / n_cells;
    const Box padded{bb.xlo - 3.0 * h, bb.ylo - 3.0 * h, bb.xhi + 3.0 * h, bb.yhi + 3.0 * h};
    return Grid::cover(padded, n_cells + 6);
}

// Binary field dump: magic "ESS1", u32 nx, u32 ny, f64 h, f64 x0, f64 y0,
// then nx*ny doubles row-major (i fastest), little-endian host order.
inline void write_field_binary(const ScalarField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw SolverError("cannot open for write: " + path);
    os.write("ESS1", 4);
    const std::uint32_t nx = static_cast<std::uint32_t>(f.grid.nx);
    const std::uint32_t ny = static_cast<std::uint32_t>(f.grid.ny);
    os.write(reinterpret_cast<const char*>(&nx), 4);
    os.write(reinterpret_cast<const char*>(&ny), 4);
    os.write(reinterpret_cast<const char*>(&f.grid.h), 8);
    os.write(reinterpret_cast<const char*>(&f.grid.x0), 8);
    os.write(reinterpret_cast<const char*>(&f.grid.y0), 8);
    os.write(reinterpret_cast<const char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * 8));
    if (!os) throw SolverError("short write: " + path);
}

inline ScalarField read_field_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SolverError("cannot open for read: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "ESS1", 4) != 0) throw SolverError("bad field magic in " + path);
    std::uint32_t nx = 0, ny = 0;
    is.read(reinterpret_cast<char*>(&nx), 4);
    is.read(reinterpret_cast<char*>(&ny), 4);
    Grid g;
    is.read(reinterpret_cast<char*>(&g.h), 8);
    is.read(reinterpret_cast<char*>(&g.x0), 8);
    is.read(reinterpret_cast<char*>(&g.y0), 8);
    g.nx = static_cast<int>(nx);
    g.ny = static_cast<int>(ny);
    ScalarField f(g);
    is.read(reinterpret_cast<char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * 8));
    if (!is) throw SolverError("short read: " + path);
    return f;
}

}  // namespace ess

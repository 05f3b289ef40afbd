// Stream-function solve on the embedded-boundary grid: psi with
// Laplacian(psi) = omega inside the domain, psi = 0 on the curved wall, via a
// symmetric boundary-cut five-point stencil.  Velocity follows by cubic
// interpolation of psi and the perpendicular gradient.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include "ess/common.hpp"
#include "ess/geometry.hpp"
#include "ess/green.hpp"
#include "ess/grid.hpp"

namespace ess {

struct PoissonOptions {
    enum class Backend { direct, cg };
    Backend backend = Backend::direct;
    double cg_tol = 1e-12;
    int cg_max_iters = 50000;
    double residual_limit = 1e-10;  // relative algebraic residual guard
    double theta_min = 1e-4;        // clamp on boundary-cut arm fractions
};

struct StreamFunction {
    ScalarField psi;        // ghost-extended for interpolation across the wall
    double residual = 0.0;  // relative algebraic residual of the solve
};

// Factor once per (domain, grid); solve repeatedly as the vorticity evolves.
class StreamSolver {
  public:
    StreamSolver(const Domain& dom, const Grid& grid, PoissonOptions opt = {})
        : dom_(dom), grid_(grid), opt_(opt) {
        build_index();
        assemble();
        if (opt_.backend == PoissonOptions::Backend::direct) {
            ldlt_.compute(A_);
            if (ldlt_.info() != Eigen::Success)
                throw SolverError("stream solve: factorization failed");
        } else {
            cg_.setTolerance(opt_.cg_tol);
            cg_.setMaxIterations(opt_.cg_max_iters);
            cg_.compute(A_);
        }
    }

    const Grid& grid() const { return grid_; }
    const Domain& domain() const { return dom_; }
    int interior_count() const { return static_cast<int>(rows_.size()); }

    StreamFunction solve(const ScalarField& omega) const {
        if (omega.grid.nx != grid_.nx || omega.grid.ny != grid_.ny)
            throw ConfigError("stream solve: vorticity grid mismatch");
        Eigen::VectorXd b(rows_.size());
        for (std::size_t k = 0; k < rows_.size(); ++k) b[k] = -omega.v[rows_[k]];

        Eigen::VectorXd sol;
        if (opt_.backend == PoissonOptions::Backend::direct) {
            sol = ldlt_.solve(b);
        } else {
            sol = cg_.solve(b);
        }

        const double bn = b.norm();
        double rel = 0.0;
        if (bn > 0.0) rel = (A_ * sol - b).norm() / bn;
        if (!(rel <= opt_.residual_limit))
            throw SolverError("stream solve: residual " + format_real(rel) +
                              " exceeds limit " + format_real(opt_.residual_limit));

        StreamFunction out;
        out.psi = ScalarField(grid_);
        for (std::size_t k = 0; k < rows_.size(); ++k) out.psi.v[rows_[k]] = sol[k];
        out.residual = rel;
        fill_mirror_ghosts(out.psi, dom_, Extension::odd);
        return out;
    }

  private:
    void build_index() {
        node_to_row_.assign(grid_.size(), -1);
        for (int j = 0; j < grid_.ny; ++j) {
            for (int i = 0; i < grid_.nx; ++i) {
                if (dom_.contains(grid_.at(i, j))) {
                    node_to_row_[grid_.index(i, j)] = static_cast<int>(rows_.size());
                    rows_.push_back(grid_.index(i, j));
                }
            }
        }
        if (rows_.empty()) throw DomainError("stream solve: no interior nodes");
    }

    double cut_fraction(Point2 inside_pt, Point2 outside_pt) const {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 45; ++it) {
            const double mid = 0.5 * (lo + hi);
            const Point2 p{inside_pt.x + mid * (outside_pt.x - inside_pt.x),
                           inside_pt.y + mid * (outside_pt.y - inside_pt.y)};
            if (dom_.contains(p))
                lo = mid;
            else
                hi = mid;
        }
        return std::max(0.5 * (lo + hi), opt_.theta_min);
    }

    void assemble() {
        const double inv_h2 = 1.0 / (grid_.h * grid_.h);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(rows_.size() * 5);
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (std::size_t k = 0; k < rows_.size(); ++k) {
            const std::size_t node = rows_[k];
            const int i = static_cast<int>(node % grid_.nx);
            const int j = static_cast<int>(node / grid_.nx);
            const Point2 p = grid_.at(i, j);
            double diag = 0.0;
            for (int arm = 0; arm < 4; ++arm) {
                const int ii = i + di[arm], jj = j + dj[arm];
                int neighbor_row = -1;
                if (ii >= 0 && jj >= 0 && ii < grid_.nx && jj < grid_.ny)
                    neighbor_row = node_to_row_[grid_.index(ii, jj)];
                if (neighbor_row >= 0) {
                    diag += inv_h2;
                    trip.emplace_back(static_cast<int>(k), neighbor_row, -inv_h2);
                } else {
                    // Wall crossing between p and the outside neighbor: the
                    // Dirichlet zero at the cut folds into the diagonal,
                    // keeping the operator symmetric positive definite.
                    const Point2 q{grid_.x0 + grid_.h * ii, grid_.y0 + grid_.h * jj};
                    const double theta = cut_fraction(p, q);
                    diag += inv_h2 / theta;
                }
            }
            trip.emplace_back(static_cast<int>(k), static_cast<int>(k), diag);
        }
        A_.resize(static_cast<int>(rows_.size()), static_cast<int>(rows_.size()));
        A_.setFromTriplets(trip.begin(), trip.end());
        A_.makeCompressed();
    }

    Domain dom_;
    Grid grid_;
    PoissonOptions opt_;
    std::vector<std::size_t> rows_;
    std::vector<int> node_to_row_;
    Eigen::SparseMatrix<double> A_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg_;
};

inline StreamFunction solve_stream(const Domain& dom, const ScalarField& omega,
                                   PoissonOptions opt = {}) {
    return StreamSolver(dom, omega.grid, opt).solve(omega);
}

// u = (d psi / d x2, -d psi / d x1) from the cubic interpolant of psi.
inline VelocitySample velocity_at(const StreamFunction& sf, const Domain& dom, Point2 x) {
    if (!dom.contains(x)) throw DomainError("velocity_at: point outside the domain");
    const Grid& g = sf.psi.grid;
    if (x.x < g.x0 + g.h || x.x > g.x(g.nx - 1) - g.h || x.y < g.y0 + g.h ||
        x.y > g.y(g.ny - 1) - g.h)
        throw DomainError("velocity_at: point within one cell of the covering box edge");
    const InterpValue iv = interp_bicubic(sf.psi, x);
    return {iv.ddy, -iv.ddx, x};
}

}  // namespace ess

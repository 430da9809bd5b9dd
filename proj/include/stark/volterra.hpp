#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "stark/basis.hpp"
#include "stark/potential.hpp"

namespace stark {

/// Composite Gauss-Legendre discretization of [0, x_max].
///
/// Panels are graded by the local wavenumber sqrt|x - z| of the unperturbed
/// solutions and refined by `turning_refinement` around the turning point
/// x = z; every non-analytic point of q is a panel boundary.
struct Grid {
    std::vector<double> breaks;   ///< panel boundaries; breaks.front() == 0, breaks.back() == x_max
    std::vector<double> nodes;    ///< Gauss nodes, panel-major
    std::vector<double> weights;  ///< quadrature weights for the nodes
    int points_per_panel = 0;
    double x_max = 0.0;
    double z_center = 0.0;
    double baseline_spacing = 0.0;  ///< mean node spacing away from the turning point

    std::size_t panels() const { return breaks.empty() ? 0 : breaks.size() - 1; }
    std::size_t size() const { return nodes.size(); }
    std::size_t panel_of(std::size_t node) const { return node / static_cast<std::size_t>(points_per_panel); }
};

struct GridOptions {
    double tail_tol = 1e-12;
    int points_per_panel = 10;
    double resolution = 0.5;         ///< target (local wavenumber) x (panel width)
    double max_panel = 0.5;
    double turning_halfwidth = 2.0;
    double turning_refinement = 4.0;
    std::vector<double> extra_breakpoints;  ///< forced panel boundaries, e.g. kinks of a direction v
};

/// Smallest x_max >= max(z, 0) + (1.5 ln(1/tail_tol))^{2/3} + margin with
/// g_A(x_max - z) <= tail_tol and |q| g_A <= tail_tol (1 + sup|q|) beyond it.
/// Requires tail_tol in (0, 1e-6].
double truncation_point(const Potential& q, double z, double tail_tol);

/// Grid valid for every spectral parameter in [z_lo, z_hi].
Grid make_grid(const Potential& q, double z_lo, double z_hi, const GridOptions& options = {});

/// Values at x = 0 of a solution, its x-derivative, z-derivative and the
/// mixed derivative d/dx d/dz.
struct PointValues {
    double value = 0.0;
    double deriv = 0.0;
    double z_deriv = 0.0;
    double z_deriv_prime = 0.0;
};

/// A solution sampled at the grid nodes. `z_derivs` / `z_derivs_prime` are
/// empty when the z-derivative was not requested.
struct SolutionProfile {
    double z = 0.0;
    std::vector<double> x;
    std::vector<double> values;
    std::vector<double> derivs;
    std::vector<double> z_derivs;
    std::vector<double> z_derivs_prime;
    PointValues at_zero;
    double tail_bound = 0.0;  ///< bound on the effect of truncating at x_max
    int iterations = 0;       ///< Picard sweeps for the value equation
    double residual = 0.0;    ///< weighted defect of the converged equation, relative
};

struct SolveOptions {
    bool z_derivative = true;
    double tolerance = 1e-12;
    int max_iterations = 50;
};

/// Square-integrable solution psi(q, z, .) from
/// psi = psi0 - int_x^inf J0(x, y) q(y) psi(y) dy, and its z-derivative from
/// the differentiated equation.
SolutionProfile solve_psi(const Potential& q, double z, const Grid& grid, const SolveOptions& options = {});

/// Growing solution theta(q, z, .) from theta = theta0 + int_0^x J0 q theta.
SolutionProfile solve_theta(const Potential& q, double z, const Grid& grid, const SolveOptions& options = {});

/// Fundamental pair: s(0) = 0, s'(0) = 1 and c(0) = 1, c'(0) = 0. The
/// z-derivative is computed for s only.
std::pair<SolutionProfile, SolutionProfile> solve_sc(const Potential& q, double z, const Grid& grid,
                                                     const SolveOptions& options = {});

/// Weighted residual of a profile against -f'' + (x + q - z) f = 0, using
/// per-panel spectral differentiation of the derivative samples.
double ode_residual(const Potential& q, const SolutionProfile& profile, const Grid& grid);

}  // namespace stark

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stark/potential.hpp"

namespace stark {

/// Second-order finite-difference discretization of -d^2/dx^2 + x + q(x) on
/// [0, L] with Dirichlet conditions at both ends. Interior nodes x_i = i h,
/// i = 1..N with N = round(L / h) - 1.
struct DiscreteOperator {
    double L = 0.0;
    double h = 0.0;
    std::vector<double> diag;
    double offdiag = 0.0;  ///< every off-diagonal entry, -1 / h^2

    static DiscreteOperator build(const Potential& q, double L, double h);
    std::size_t size() const { return diag.size(); }
    /// Number of eigenvalues strictly below `lambda` (Sturm sequence).
    std::size_t count_below(double lambda) const;
};

/// Lowest `count` eigenvalues of the discrete operator, each to 1e-10 absolute.
/// Throws TruncationError when the last eigenvector has mass above 1e-8 in
/// the final tenth of [0, L].
std::vector<double> oracle_spectrum(const Potential& q, double L, double h, int count);

/// Discrete norming constant log(psi'(0)^2 / ||psi||^2) of eigenpair n, with
/// psi'(0) from the one-sided second-order difference of the eigenvector.
double oracle_norming(const Potential& q, double L, double h, int n);

/// Eigenvalues and norming constants 1..count of one discrete operator.
struct DiscreteSpectrum {
    std::vector<double> lambda;
    std::vector<double> kappa;
};
DiscreteSpectrum oracle_solve(const Potential& q, double L, double h, int count);

struct RichardsonResult {
    double value = 0.0;
    double error_estimate = 0.0;  ///< size of the last correction
    double observed_order = 0.0;  ///< from the three coarsest levels
    std::string warning;          ///< non-empty when the observed order is off by more than 30%
};

/// Repeated Richardson elimination of the h^order, h^{order+2}, ... terms
/// from values on meshes h, h/2, h/4, ... (at least three levels).
RichardsonResult richardson(const std::vector<std::pair<double, double>>& values, int order);

struct OracleOptions {
    std::vector<double> steps = {0.01, 0.005, 0.0025, 0.00125};
    double margin = 5.0;  ///< added to the truncation point of the highest eigenvalue
};

/// Domain length for eigenvalues up to `lambda_max`, rounded up to a
/// multiple of 0.25 so that every mesh divides it.
double oracle_length(const Potential& q, double lambda_max, double margin = 5.0);

struct OracleResult {
    double L = 0.0;
    std::vector<RichardsonResult> lambda;
    std::vector<RichardsonResult> kappa;
};

/// Richardson-extrapolated eigenvalues and norming constants for n = 1..count.
OracleResult oracle_extrapolated(const Potential& q, int count, const OracleOptions& options = {});

}  // namespace stark

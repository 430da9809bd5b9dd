#pragma once

#include <string>
#include <vector>

#include "stark/potential.hpp"
#include "stark/volterra.hpp"

namespace stark {

/// One Dirichlet eigenvalue with its norming constant and the data used to
/// compute it.
struct EigenRecord {
    int n = 0;
    double lambda = 0.0;
    double kappa = 0.0;  ///< log(-psi'(0) / psi_dot(0))
    double bracket_lo = 0.0, bracket_hi = 0.0;
    double shoot_residual = 0.0;  ///< |psi(q, lambda, 0)|
    double psi_prime = 0.0;       ///< psi'(q, lambda, 0)
    double psi_dot = 0.0;         ///< d/dz psi(q, z, 0) at z = lambda
    double psi_dot_prime = 0.0;   ///< d/dz psi'(q, z, 0) at z = lambda
    double norm_sq = 0.0;         ///< -psi' psi_dot
    double norm_sq_direct = 0.0;  ///< quadrature of psi^2 over the grid
    double norm_gap = 0.0;        ///< |norm_sq - norm_sq_direct| / norm_sq
    double kappa_alt = 0.0;       ///< log(psi'^2 / norm_sq_direct)
    int sign_changes = 0;         ///< of psi(q, lambda, .) on (0, x_max)
    std::string method = "shooting";
};

struct SpectrumOptions {
    GridOptions grid;
    SolveOptions solve;
    double root_tol = 1e-11;  ///< |delta lambda| <= root_tol (1 + |lambda|)
    int max_doublings = 6;
};

/// Half-width of the localization window around -a_n, 4 (3 pi n / 2)^{-2/3 + 0.05}.
double localization_radius(int n);

/// Eigenvalue number n >= 1 by bracketed root-finding on z -> psi(q, z, 0).
/// Throws BracketError when no sign change is found or the eigenfunction
/// has the wrong number of nodes.
EigenRecord locate_eigenvalue(const Potential& q, int n, const SpectrumOptions& options = {});

/// Records for n = n_min..n_max, solved on `threads` workers (0: hardware).
std::vector<EigenRecord> locate_eigenvalues(const Potential& q, int n_min, int n_max,
                                            const SpectrumOptions& options = {}, unsigned threads = 0);

/// Both forms of ||psi||^2 for a converged record; throws NumericError when
/// they differ by more than 1e-5 relative.
struct NormPair {
    double direct = 0.0;
    double identity = 0.0;
    double gap = 0.0;
};
NormPair norm_sq_psi(const Potential& q, const EigenRecord& record, const SpectrumOptions& options = {});

/// d lambda_n(q + t v) / dt at t = 0, i.e. int eta_n^2 v.
double lambda_directional_derivative(const Potential& q, int n, const Potential& v,
                                     const SpectrumOptions& options = {});

/// d kappa_n(q + t v) / dt at t = 0.
double kappa_directional_derivative(const Potential& q, int n, const Potential& v,
                                    const SpectrumOptions& options = {});

/// Negative eigenvalues, found by a sweep of the shooting function over
/// [-10 (1 + sup|q|), 0) and refined. Under a small perturbation the list is empty.
std::vector<double> scan_negative_eigenvalues(const Potential& q, const SpectrumOptions& options = {});

/// Smallest n0 such that |lambda_m + a_m| <= localization_radius(m) for every
/// record with m >= n0; returns records.back().n + 1 if the last one fails.
int localization_onset(const std::vector<EigenRecord>& records);

/// Unperturbed basis at an eigenvalue: alpha = psi0(lambda_n, 0) and the
/// normalized derivative psi0'(lambda_n, 0) (-1)^{n+1} (3 pi n / 2)^{-1/6}.
struct BasisDiagnostic {
    int n = 0;
    double alpha = 0.0;
    double beta_normalized = 0.0;
};
BasisDiagnostic basis_diagnostic(const EigenRecord& record);

}  // namespace stark

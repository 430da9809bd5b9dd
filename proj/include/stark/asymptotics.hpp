#pragma once

#include <vector>

#include "stark/potential.hpp"

namespace stark {

/// First-order eigenvalue prediction -a_n + pi (-a_n)^{-1/2} int Ai^2(x + a_n) q.
double lambda_prediction(const Potential& q, int n);

/// First-order norming-constant prediction -2 pi (-a_n)^{-1/2} int Ai Ai'(x + a_n) q.
double kappa_prediction(const Potential& q, int n);

/// The same quantity after integrating by parts: pi (-a_n)^{-1/2} int Ai^2(x + a_n) q'.
double kappa_prediction_by_parts(const Potential& q, int n);

struct SlopeFit {
    double slope = 0.0;
    double half_width = 0.0;  ///< 95% confidence half-width
    double intercept = 0.0;
    int points = 0;
};

/// Least-squares slope of log|resid_i| against log n_i over the entries with
/// |resid| >= floor. Throws InsufficientDataError with fewer than 8 such points.
SlopeFit decay_rate_fit(const std::vector<double>& resid, const std::vector<int>& n, double floor);

struct AsymptoticsReport {
    std::vector<int> n;
    std::vector<double> lambda_pred, kappa_pred;
    std::vector<double> lambda_resid, kappa_resid;  ///< computed - predicted
    std::vector<double> omega_r_values;
    SlopeFit lambda_fit, kappa_fit;
    bool lambda_fit_ok = false, kappa_fit_ok = false;  ///< false when every residual sits below the floor
    double lambda_constant = 0.0;                      ///< max |lambda_resid| n
    double kappa_constant = 0.0;                       ///< max |kappa_resid| n
};

/// Residuals of computed eigen data against the predictions. `lambda` and
/// `kappa` are indexed like `n`; the fits use only indices >= fit_min_n.
AsymptoticsReport asymptotics_report(const Potential& q, const std::vector<int>& n, const std::vector<double>& lambda,
                                     const std::vector<double>& kappa, double floor, int fit_min_n = 2);

}  // namespace stark

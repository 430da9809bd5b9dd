#pragma once

#include <functional>
#include <span>
#include <vector>

namespace stark {

/// Gauss-Legendre rule on [-1, 1] together with the matrices that integrate
/// and differentiate the interpolant through its nodes.
///
/// For a function sampled at the nodes, `head(i, k)` and `tail(i, k)` give
/// the weight of sample k in the integral of the interpolant over
/// [-1, t_i] and [t_i, 1]; `diff(i, k)` is l_k'(t_i).
struct PanelRule {
    int points = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> head_matrix;
    std::vector<double> tail_matrix;
    std::vector<double> diff_matrix;

    double head(int i, int k) const { return head_matrix[i * points + k]; }
    double tail(int i, int k) const { return tail_matrix[i * points + k]; }
    double diff(int i, int k) const { return diff_matrix[i * points + k]; }
};

/// Shared, lazily built rule with `points` nodes (2 <= points <= 40).
const PanelRule& panel_rule(int points);

using Integrand = std::function<double(double)>;

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    unsigned max_depth = 18;
};

/// Adaptive Gauss-Kronrod over [a, b]. Throws NumericError when the error
/// estimate exceeds max(abs_tol, rel_tol * L1 norm of the integrand).
double integrate(const Integrand& f, double a, double b, const QuadratureOptions& opt = {});

/// Sum of adaptive integrals over consecutive breakpoints (sorted, deduplicated).
double integrate_pieces(const Integrand& f, std::span<const double> breakpoints,
                        const QuadratureOptions& opt = {});

/// Integral over [a, inf) by the exp-sinh transformation.
double integrate_to_infinity(const Integrand& f, double a, const QuadratureOptions& opt = {});

}  // namespace stark

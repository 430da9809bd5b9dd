#pragma once

#include <span>

namespace stark {

/// Airy functions of the first and second kind at a real argument.
///
/// When `scaled` is false the fields hold Ai, Ai', Bi, Bi' directly. For large
/// positive arguments Bi overflows a double; the values are then returned
/// scaled, with Ai = ai * exp(-exponent) and Bi = bi * exp(+exponent), where
/// exponent = (2/3) w^{3/2}.
struct AiryValues {
    double w = 0.0;
    double ai = 0.0;
    double ai_prime = 0.0;
    double bi = 0.0;
    double bi_prime = 0.0;
    bool scaled = false;
    double exponent = 0.0;
};

/// Growth/decay envelope of Airy-type solutions.
struct Envelope {
    double w = 0.0;
    double sigma = 1.0;  ///< 1 + |w|^{1/4}
    double g_a = 1.0;    ///< exp(-(2/3) Re w^{3/2})
    double g_b = 1.0;    ///< 1 / g_a
    double log_g_a = 0.0;
};

struct AiryZero {
    int n = 0;
    double a_n = 0.0;
    double refinement_residual = 0.0;  ///< Ai(a_n) after refinement
};

/// Largest |w| accepted by the evaluators.
inline constexpr double airy_max_argument = 200.0;

/// (2/3) max(w, 0)^{3/2}; the exponent shared by the scaled representation
/// and the envelope g_A.
double airy_exponent(double w);

/// Ai, Ai', Bi, Bi' at w. Unscaled whenever the values are representable.
/// Throws DomainError for NaN or |w| > airy_max_argument.
AiryValues airy_eval(double w);

/// Always-scaled evaluation: ai = Ai(w) e^{zeta}, bi = Bi(w) e^{-zeta} with
/// zeta = airy_exponent(w) (zero for w <= 0).
AiryValues airy_eval_scaled(double w);

/// Leading-order location -(3 pi / 2 (n - 1/4))^{2/3} of the n-th zero of Ai.
double airy_zero_seed(int n);

/// n-th zero of Ai (n >= 1), refined by safeguarded Newton iteration.
AiryZero airy_zero(int n);

Envelope envelope(double w);

/// Empirical constant of the Airy envelope bounds:
/// max over the grid of |Ai| sigma / g_A and |Ai'| / (sigma g_A).
double envelope_margin(std::span<const double> grid);

}  // namespace stark

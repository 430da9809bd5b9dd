#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace stark {

enum class Family { exp_decay, alg_decay, bump, tabulated };

/// Natural cubic spline through (x_i, y_i); zero to the right of the last node.
class NaturalSpline {
public:
    NaturalSpline(std::vector<double> x, std::vector<double> y);

    double value(double x) const;
    double derivative(double x) const;
    double first() const { return x_.front(); }
    double last() const { return x_.back(); }
    const std::vector<double>& knots() const { return x_; }
    /// Upper bound on |s(x)| over [0, last], from dense sampling.
    double sup_abs() const { return sup_; }

private:
    std::size_t segment(double x) const;

    std::vector<double> x_, y_, m_;  // m_ = second derivatives at the knots
    double sup_ = 0.0;
};

/// One term of a potential. Parameters not used by the family stay zero.
struct PotentialTerm {
    Family family = Family::exp_decay;
    double c = 0.0;       ///< amplitude
    double rate = 0.0;    ///< exp: a in c e^{-a x}; alg: p in c (1+x)^{-p}
    double center = 0.0;  ///< bump: x0
    double width = 0.0;   ///< bump: w
    std::shared_ptr<const NaturalSpline> table;

    double value(double x) const;
    double derivative(double x) const;
    /// Bound on |term(y)| for every y >= x.
    double tail_bound(double x) const;
};

/// A perturbation q(x) on the half-line with its derivative q'(x) and the
/// weight exponent r of the space it is measured in. Immutable.
///
/// A Potential is a finite sum of family terms; the JSON descriptor builds a
/// single term, sums arise from scaling and adding potentials.
class Potential {
public:
    /// Zero perturbation.
    explicit Potential(double r = 2.0);
    /// Validates r > 1 and every term's admissibility for that r.
    Potential(std::vector<PotentialTerm> terms, double r);

    double operator()(double x) const;
    double derivative(double x) const;
    double r() const { return r_; }
    bool is_zero() const { return terms_.empty(); }
    const std::vector<PotentialTerm>& terms() const { return terms_; }

    /// Bound on |q(y)| for y >= x.
    double tail_bound(double x) const;
    double sup_abs() const { return tail_bound(0.0); }
    /// Right end of the support, or +inf.
    double support_end() const;
    /// Points where q is not analytic (bump edges, spline knots, support end).
    std::vector<double> breakpoints() const;

    Potential scaled(double factor) const;
    Potential plus(const Potential& other) const;

    std::string describe() const;

private:
    std::vector<PotentialTerm> terms_;
    double r_ = 2.0;
};

inline Potential operator*(double factor, const Potential& q) { return q.scaled(factor); }
inline Potential operator+(const Potential& a, const Potential& b) { return a.plus(b); }

/// Family descriptor: `{"family": "exp"|"alg"|"bump"|"table", "params": {...}, "r": number}`.
struct PotentialSpec {
    std::string family;
    std::map<std::string, double> params;
    std::vector<double> table_x, table_y;
    double r = 2.0;
};

/// Build and validate a potential; throws ValidationError on inadmissible
/// parameters (r <= 1, non-integrable decay, malformed table, ...).
Potential make_potential(const PotentialSpec& spec);

PotentialSpec potential_spec_from_json(const nlohmann::json& j);
nlohmann::json potential_spec_to_json(const PotentialSpec& spec);
Potential potential_from_json(const nlohmann::json& j);

// Convenience constructors for tests and experiments.
Potential exp_decay(double c, double a, double r = 2.0);
Potential alg_decay(double c, double p, double r = 2.0);
Potential bump(double c, double x0, double w, double r = 2.0);

struct NormBundle {
    double ar_norm = 0.0;             ///< ||q||_{A_r}
    double afr_norm = 0.0;            ///< (||q||_{A_r}^2 + ||q'||_{A_r}^2)^{1/2}, integrated directly
    double derivative_ar_norm = 0.0;  ///< ||q'||_{A_r}
    double l1_norm = 0.0;             ///< ||q||_1
    double l1_bar = 0.0;              ///< ||q||_1 + ||q'||_1
};

/// All four weighted norms by adaptive quadrature (relative tolerance 1e-8 or better).
NormBundle norms(const Potential& q);

/// omega(q, z) = int_0^inf |q(x)| / sqrt(1 + |x - z|) dx; with `with_derivative`
/// the sum omega(q, z) + omega(q', z).
double omega(const Potential& q, double z, bool with_derivative = false);

/// n^{-1/3} log^{1/2} n for r in (1, 2), n^{-1/3} for r >= 2.
double omega_r(double r, int n);

/// Integral over [0, inf) of an integrand that carries the decay of q,
/// split at the potential's breakpoints and any `extra` points.
double integrate_against(const Potential& q, const std::function<double(double)>& f,
                         std::vector<double> extra = {}, double rel_tol = 1e-11);

}  // namespace stark

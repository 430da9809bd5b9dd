#include "stark/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stark/airy.hpp"
#include "stark/error.hpp"
#include "stark/quadrature.hpp"

namespace stark {
namespace {

const double sqrt_pi = std::sqrt(std::numbers::pi);

// Beyond this |x - z| the unscaled Airy products leave double range.
constexpr double max_airy_span = 90.0;

// Unperturbed basis sampled on a grid at one spectral parameter.
struct BasisTable {
    double z = 0.0;
    std::vector<double> psi0, dpsi0, theta0, dtheta0;
    std::vector<double> shift;   // x - z
    std::vector<double> weight;  // sigma(x - z) / g_A(x - z): envelope of decaying solutions
    std::vector<double> qv;
    BasisValues at0;
};

BasisTable make_table(const Potential& q, double z, const Grid& grid) {
    const double span = std::max(std::abs(z), std::abs(grid.x_max - z));
    if (!(span <= max_airy_span)) {
        std::ostringstream msg;
        msg << "volterra: |x - z| up to " << span << " exceeds the supported range " << max_airy_span;
        throw NumericError(msg.str());
    }
    const std::size_t n = grid.size();
    BasisTable t;
    t.z = z;
    t.psi0.resize(n);
    t.dpsi0.resize(n);
    t.theta0.resize(n);
    t.dtheta0.resize(n);
    t.shift.resize(n);
    t.weight.resize(n);
    t.qv.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = grid.nodes[i] - z;
        const AiryValues v = airy_eval(w);
        t.psi0[i] = sqrt_pi * v.ai;
        t.dpsi0[i] = sqrt_pi * v.ai_prime;
        t.theta0[i] = sqrt_pi * v.bi;
        t.dtheta0[i] = sqrt_pi * v.bi_prime;
        t.shift[i] = w;
        t.weight[i] = (1.0 + std::pow(std::abs(w), 0.25)) * std::exp(airy_exponent(w));
        t.qv[i] = q(grid.nodes[i]);
    }
    t.at0 = basis_eval(z, 0.0);
    return t;
}

// out[i] = int_{x_i}^{x_max} g; returns int_0^{x_max} g.
double tail_integrals(const Grid& grid, const std::vector<double>& g, std::vector<double>& out) {
    const PanelRule& rule = panel_rule(grid.points_per_panel);
    const int m = rule.points;
    out.resize(g.size());
    double acc = 0.0;
    for (std::size_t j = grid.panels(); j-- > 0;) {
        const double half = 0.5 * (grid.breaks[j + 1] - grid.breaks[j]);
        const double* gp = g.data() + j * m;
        double full = 0.0;
        for (int k = 0; k < m; ++k) full += rule.weights[k] * gp[k];
        for (int i = 0; i < m; ++i) {
            double partial = 0.0;
            const double* row = rule.tail_matrix.data() + i * m;
            for (int k = 0; k < m; ++k) partial += row[k] * gp[k];
            out[j * m + i] = acc + half * partial;
        }
        acc += half * full;
    }
    return acc;
}

// out[i] = int_0^{x_i} g.
void head_integrals(const Grid& grid, const std::vector<double>& g, std::vector<double>& out) {
    const PanelRule& rule = panel_rule(grid.points_per_panel);
    const int m = rule.points;
    out.resize(g.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.panels(); ++j) {
        const double half = 0.5 * (grid.breaks[j + 1] - grid.breaks[j]);
        const double* gp = g.data() + j * m;
        double full = 0.0;
        for (int k = 0; k < m; ++k) full += rule.weights[k] * gp[k];
        for (int i = 0; i < m; ++i) {
            double partial = 0.0;
            const double* row = rule.head_matrix.data() + i * m;
            for (int k = 0; k < m; ++k) partial += row[k] * gp[k];
            out[j * m + i] = acc + half * partial;
        }
        acc += half * full;
    }
}

// Product a[i] * b[i] * c[i].
void product(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
             std::vector<double>& out) {
    out.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i] * c[i];
}

struct TailPair {
    std::vector<double> a, b;  // int_x^inf psi0 q f, int_x^inf theta0 q f
    double a0 = 0.0, b0 = 0.0;
};

struct Scratch {
    std::vector<double> g;
};

void tails(const BasisTable& t, const Grid& grid, const std::vector<double>& f, const std::vector<double>& wa,
           const std::vector<double>& wb, TailPair& out, Scratch& s) {
    product(wa, t.qv, f, s.g);
    out.a0 = tail_integrals(grid, s.g, out.a);
    product(wb, t.qv, f, s.g);
    out.b0 = tail_integrals(grid, s.g, out.b);
}

void heads(const BasisTable& t, const Grid& grid, const std::vector<double>& f, const std::vector<double>& wa,
           const std::vector<double>& wb, TailPair& out, Scratch& s) {
    product(wa, t.qv, f, s.g);
    head_integrals(grid, s.g, out.a);
    product(wb, t.qv, f, s.g);
    head_integrals(grid, s.g, out.b);
}

double weighted_max(const std::vector<double>& v, const std::vector<double>& w) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]) * w[i]);
    return m;
}

std::string iteration_failure(const char* what, double z, int cap, double change, double scale) {
    std::ostringstream msg;
    msg << what << "(z=" << z << "): Picard iteration did not converge in " << cap << " sweeps (last change "
        << change << " vs scale " << scale << "); grid or truncation defect";
    return msg.str();
}

// Solve u = source - K[u] with K[u](x) = theta0(x) A(x) - psi0(x) B(x),
// A = int_x^inf psi0 q u, B = int_x^inf theta0 q u. On return `tp` holds the
// tail integrals of the converged u.
int picard_backward(const BasisTable& t, const Grid& grid, const std::vector<double>& source, std::vector<double>& u,
                    TailPair& tp, const SolveOptions& opt, double& residual, const char* what) {
    Scratch s;
    u = source;
    std::vector<double> next(u.size()), change(u.size());
    for (int it = 1; it <= opt.max_iterations; ++it) {
        tails(t, grid, u, t.psi0, t.theta0, tp, s);
        for (std::size_t i = 0; i < u.size(); ++i) {
            next[i] = source[i] - (t.theta0[i] * tp.a[i] - t.psi0[i] * tp.b[i]);
            change[i] = next[i] - u[i];
        }
        const double delta = weighted_max(change, t.weight);
        const double scale = std::max(weighted_max(next, t.weight), 1e-300);
        u.swap(next);
        if (delta <= opt.tolerance * scale) {
            tails(t, grid, u, t.psi0, t.theta0, tp, s);
            for (std::size_t i = 0; i < u.size(); ++i)
                change[i] = source[i] - (t.theta0[i] * tp.a[i] - t.psi0[i] * tp.b[i]) - u[i];
            residual = weighted_max(change, t.weight) / scale;
            return it;
        }
        if (it == opt.max_iterations) throw NumericError(iteration_failure(what, t.z, it, delta, scale));
    }
    return opt.max_iterations;
}

// Solve u = source + K[u] with head integrals (forward equation).
int picard_forward(const BasisTable& t, const Grid& grid, const std::vector<double>& source,
                   const std::vector<double>& metric, std::vector<double>& u, TailPair& hp, const SolveOptions& opt,
                   double& residual, const char* what) {
    Scratch s;
    u = source;
    std::vector<double> next(u.size()), change(u.size());
    for (int it = 1; it <= opt.max_iterations; ++it) {
        heads(t, grid, u, t.psi0, t.theta0, hp, s);
        for (std::size_t i = 0; i < u.size(); ++i) {
            next[i] = source[i] + (t.theta0[i] * hp.a[i] - t.psi0[i] * hp.b[i]);
            change[i] = next[i] - u[i];
        }
        const double delta = weighted_max(change, metric);
        const double scale = std::max(weighted_max(next, metric), 1e-300);
        u.swap(next);
        if (delta <= opt.tolerance * scale) {
            heads(t, grid, u, t.psi0, t.theta0, hp, s);
            for (std::size_t i = 0; i < u.size(); ++i)
                change[i] = source[i] + (t.theta0[i] * hp.a[i] - t.psi0[i] * hp.b[i]) - u[i];
            residual = weighted_max(change, metric) / scale;
            return it;
        }
        if (it == opt.max_iterations) throw NumericError(iteration_failure(what, t.z, it, delta, scale));
    }
    return opt.max_iterations;
}

double tail_bound_for(const Potential& q, double z, const Grid& grid) {
    const double ga = std::exp(-airy_exponent(grid.x_max - z));
    return ga * q.tail_bound(grid.x_max) / (1.0 + q.sup_abs());
}

// The backward equation is cut at x_max. Past it psi stays close to psi0 and
// the kernel term growing with theta0 only contributes a slowly varying
// factor: psi(x) = exp(beta) psi_cut(x) with beta = int_{x_max}^inf pi Ai Bi(y - z) q(y) dy.
// For algebraic q, beta is far above the Airy tail of the cut itself.
// The growing part of the kernel adds a local relative term -P Q, Q ~ q / (2 sqrt w),
// which enters the scale at second order as -gamma = -int P^2 q^2 / (2 sqrt w).
struct TailFactor {
    double beta = 0.0;
    double beta_dot = 0.0;  // d beta / dz
    double gamma = 0.0;
    double gamma_dot = 0.0;
    double log_scale() const { return beta + std::log1p(-gamma); }
    double log_scale_dot() const { return beta_dot - gamma_dot / (1.0 - gamma); }
    // Size of the neglected third-order terms, relative, with a safety factor of 2; checked
    // against extensions of x_max for algebraic tails.
    double remainder(double span) const { return 2.0 * std::abs(gamma) * (std::abs(beta) + std::pow(span, -1.5)); }
};

TailFactor tail_factor(const Potential& q, double z, double x_max) {
    TailFactor f;
    if (q.tail_bound(x_max) == 0.0) return f;
    // pi Ai Bi and its derivative; beyond w = 150 the two-term expansion is exact to 1e-13.
    auto product = [](double w, bool derivative) {
        if (w > 150.0) {
            if (derivative) return -0.25 * std::pow(w, -1.5) - 35.0 / 128.0 * std::pow(w, -4.5);
            return 0.5 / std::sqrt(w) * (1.0 + 5.0 / (32.0 * w * w * w));
        }
        const AiryValues v = airy_eval_scaled(w);
        if (derivative) return std::numbers::pi * (v.ai_prime * v.bi + v.ai * v.bi_prime);
        return std::numbers::pi * v.ai * v.bi;
    };
    const QuadratureOptions opt{1e-10, 1e-18};
    f.beta = integrate_to_infinity([&](double y) { return product(y - z, false) * q(y); }, x_max, opt);
    f.beta_dot = -integrate_to_infinity([&](double y) { return product(y - z, true) * q(y); }, x_max, opt);
    auto second = [&](double y, bool derivative) {
        const double w = y - z, p = product(w, false), qy = q(y);
        if (!derivative) return p * p * qy * qy / (2.0 * std::sqrt(w));
        const double dp = product(w, true);
        return (p * dp / std::sqrt(w) - p * p / (4.0 * w * std::sqrt(w))) * qy * qy;
    };
    f.gamma = integrate_to_infinity([&](double y) { return second(y, false); }, x_max, opt);
    f.gamma_dot = -integrate_to_infinity([&](double y) { return second(y, true); }, x_max, opt);
    return f;
}

SolutionProfile solve_psi_table(const Potential& q, const BasisTable& t, const Grid& grid, const SolveOptions& opt) {
    const std::size_t n = grid.size();
    SolutionProfile p;
    p.z = t.z;
    p.x = grid.nodes;
    p.tail_bound = tail_bound_for(q, t.z, grid);
    const BasisValues& b0 = t.at0;

    TailPair tp;
    p.iterations = picard_backward(t, grid, t.psi0, p.values, tp, opt, p.residual, "solve_psi");
    p.derivs.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.derivs[i] = t.dpsi0[i] - (t.dtheta0[i] * tp.a[i] - t.dpsi0[i] * tp.b[i]);
    p.at_zero.value = b0.psi0 - (b0.theta0 * tp.a0 - b0.psi0 * tp.b0);
    p.at_zero.deriv = b0.psi0_prime - (b0.theta0_prime * tp.a0 - b0.psi0_prime * tp.b0);
    const TailFactor tf = tail_factor(q, t.z, grid.x_max);
    const double scale = std::exp(tf.log_scale());
    p.tail_bound += tf.remainder(grid.x_max - t.z);
    auto rescale = [&] {
        for (double& v : p.values) v *= scale;
        for (double& v : p.derivs) v *= scale;
        p.at_zero.value *= scale;
        p.at_zero.deriv *= scale;
    };
    if (!opt.z_derivative) {
        rescale();
        return p;
    }

    // Source of the differentiated equation: psi0_dot - int_x^inf dJ0/dz q psi,
    // with dJ0/dz = -(d/dx + d/dy) J0 and psi0_dot = -psi0'.
    Scratch s;
    TailPair tpd;
    tails(t, grid, p.values, t.dpsi0, t.dtheta0, tpd, s);
    std::vector<double> source(n);
    for (std::size_t i = 0; i < n; ++i) {
        source[i] = -t.dpsi0[i] + t.dtheta0[i] * tp.a[i] - t.dpsi0[i] * tp.b[i] + t.theta0[i] * tpd.a[i] -
                    t.psi0[i] * tpd.b[i];
    }
    TailPair td;
    double dot_residual = 0.0;
    picard_backward(t, grid, source, p.z_derivs, td, opt, dot_residual, "solve_psi(z-derivative)");
    p.residual = std::max(p.residual, dot_residual);

    p.z_derivs_prime.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = t.shift[i];
        const double source_prime = w * t.theta0[i] * tp.a[i] - w * t.psi0[i] * tp.b[i] + t.dtheta0[i] * tpd.a[i] -
                                    t.dpsi0[i] * tpd.b[i];
        p.z_derivs_prime[i] = -w * t.psi0[i] + source_prime - (t.dtheta0[i] * td.a[i] - t.dpsi0[i] * td.b[i]);
    }
    const double w0 = -t.z;
    p.at_zero.z_deriv = -b0.psi0_prime + b0.theta0_prime * tp.a0 - b0.psi0_prime * tp.b0 + b0.theta0 * tpd.a0 -
                        b0.psi0 * tpd.b0 - (b0.theta0 * td.a0 - b0.psi0 * td.b0);
    p.at_zero.z_deriv_prime = -w0 * b0.psi0 + w0 * b0.theta0 * tp.a0 - w0 * b0.psi0 * tp.b0 +
                              b0.theta0_prime * tpd.a0 - b0.psi0_prime * tpd.b0 -
                              (b0.theta0_prime * td.a0 - b0.psi0_prime * td.b0);
    // d/dz [scale psi_cut] = scale (psi_cut_dot + (log scale)' psi_cut).
    for (std::size_t i = 0; i < n; ++i) {
        p.z_derivs[i] = scale * (p.z_derivs[i] + tf.log_scale_dot() * p.values[i]);
        p.z_derivs_prime[i] = scale * (p.z_derivs_prime[i] + tf.log_scale_dot() * p.derivs[i]);
    }
    p.at_zero.z_deriv = scale * (p.at_zero.z_deriv + tf.log_scale_dot() * p.at_zero.value);
    p.at_zero.z_deriv_prime = scale * (p.at_zero.z_deriv_prime + tf.log_scale_dot() * p.at_zero.deriv);
    rescale();
    return p;
}

// Forward solution seeded by alpha psi0 + beta theta0.
SolutionProfile solve_forward(const Potential& q, const BasisTable& t, const Grid& grid, double alpha, double beta,
                              const SolveOptions& opt, const char* what, std::vector<double>& metric,
                              TailPair& hp) {
    const std::size_t n = grid.size();
    SolutionProfile p;
    p.z = t.z;
    p.x = grid.nodes;
    p.tail_bound = tail_bound_for(q, t.z, grid);
    std::vector<double> source(n), source_prime(n);
    for (std::size_t i = 0; i < n; ++i) {
        source[i] = alpha * t.psi0[i] + beta * t.theta0[i];
        source_prime[i] = alpha * t.dpsi0[i] + beta * t.dtheta0[i];
    }
    // Growing solutions are measured against g_B / sigma.
    metric.resize(n);
    for (std::size_t i = 0; i < n; ++i) metric[i] = (1.0 + std::pow(std::abs(t.shift[i]), 0.25)) / t.weight[i] *
                                                     (1.0 + std::pow(std::abs(t.shift[i]), 0.25));
    p.iterations = picard_forward(t, grid, source, metric, p.values, hp, opt, p.residual, what);
    p.derivs.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.derivs[i] = source_prime[i] + t.dtheta0[i] * hp.a[i] - t.dpsi0[i] * hp.b[i];
    const BasisValues& b0 = t.at0;
    p.at_zero.value = alpha * b0.psi0 + beta * b0.theta0;
    p.at_zero.deriv = alpha * b0.psi0_prime + beta * b0.theta0_prime;
    return p;
}

}  // namespace

double truncation_point(const Potential& q, double z, double tail_tol) {
    if (!(tail_tol > 0.0 && tail_tol <= 1e-6)) throw DomainError("truncation_point: tail_tol must lie in (0, 1e-6]");
    if (!std::isfinite(z)) throw DomainError("truncation_point: z must be finite");
    const double offset = std::pow(1.5 * std::log(1.0 / tail_tol), 2.0 / 3.0);
    constexpr double margin = 0.5;
    double x = std::max(z + offset + margin, std::max(z, 0.0) + offset + margin);
    const double limit = tail_tol * (1.0 + q.sup_abs());
    while (q.tail_bound(x) * std::exp(-airy_exponent(x - z)) > limit) x += 0.5;
    return x;
}

Grid make_grid(const Potential& q, double z_lo, double z_hi, const GridOptions& options) {
    constexpr double bump_panel = 1.0 / 16.0;
    if (!(z_lo <= z_hi) || !std::isfinite(z_lo) || !std::isfinite(z_hi))
        throw DomainError("make_grid: need finite z_lo <= z_hi");
    Grid grid;
    grid.points_per_panel = options.points_per_panel;
    grid.z_center = 0.5 * (z_lo + z_hi);
    const double spread = 0.5 * (z_hi - z_lo);
    grid.x_max = truncation_point(q, z_hi, options.tail_tol);
    const double qsup = q.sup_abs();
    const double turning = options.turning_halfwidth + spread;

    auto width = [&](double x) {
        const double distance = std::abs(x - grid.z_center);
        const double k = std::sqrt(std::max(1.0, distance + spread + qsup));
        double h = std::min(options.max_panel, options.resolution / k);
        if (distance <= turning) h /= options.turning_refinement;
        // Bumps are flat but not analytic at their edges; polynomial panels need them narrow.
        for (const PotentialTerm& t : q.terms())
            if (t.family == Family::bump && std::abs(x - t.center) < t.width) h = std::min(h, t.width * bump_panel);
        return h;
    };

    std::vector<double> fixed = {0.0, grid.x_max};
    std::vector<double> forced = q.breakpoints();
    forced.insert(forced.end(), options.extra_breakpoints.begin(), options.extra_breakpoints.end());
    for (double p : forced)
        if (p > 0.0 && p < grid.x_max) fixed.push_back(p);
    for (double p : {grid.z_center - turning, grid.z_center + turning})
        if (p > 0.0 && p < grid.x_max) fixed.push_back(p);
    std::sort(fixed.begin(), fixed.end());
    fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());

    grid.breaks.push_back(0.0);
    for (std::size_t s = 0; s + 1 < fixed.size(); ++s) {
        const double a = fixed[s], b = fixed[s + 1];
        if (b - a < 1e-12) continue;
        // Equidistribute the panel density 1/width over [a, b].
        constexpr int samples = 256;
        std::vector<double> xs(samples + 1), cumulative(samples + 1, 0.0);
        for (int i = 0; i <= samples; ++i) xs[i] = a + (b - a) * i / samples;
        // Sample just inside the segment so the turning-region flag is unambiguous.
        auto density = [&](double x) { return 1.0 / width(std::clamp(x, a + 1e-9 * (b - a), b - 1e-9 * (b - a))); };
        for (int i = 1; i <= samples; ++i)
            cumulative[i] = cumulative[i - 1] + 0.5 * (density(xs[i - 1]) + density(xs[i])) * (xs[i] - xs[i - 1]);
        const int count = std::max(1, static_cast<int>(std::ceil(cumulative.back() - 1e-9)));
        for (int p = 1; p < count; ++p) {
            const double target = cumulative.back() * p / count;
            const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
            const std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
            const double f = (target - cumulative[i - 1]) / (cumulative[i] - cumulative[i - 1]);
            grid.breaks.push_back(xs[i - 1] + f * (xs[i] - xs[i - 1]));
        }
        grid.breaks.push_back(b);
    }

    const PanelRule& rule = panel_rule(grid.points_per_panel);
    for (std::size_t j = 0; j + 1 < grid.breaks.size(); ++j) {
        const double mid = 0.5 * (grid.breaks[j] + grid.breaks[j + 1]);
        const double half = 0.5 * (grid.breaks[j + 1] - grid.breaks[j]);
        for (int i = 0; i < rule.points; ++i) {
            grid.nodes.push_back(mid + half * rule.nodes[i]);
            grid.weights.push_back(half * rule.weights[i]);
        }
    }
    grid.baseline_spacing = grid.x_max / static_cast<double>(grid.nodes.size());
    return grid;
}

SolutionProfile solve_psi(const Potential& q, double z, const Grid& grid, const SolveOptions& options) {
    const BasisTable t = make_table(q, z, grid);
    return solve_psi_table(q, t, grid, options);
}

SolutionProfile solve_theta(const Potential& q, double z, const Grid& grid, const SolveOptions& options) {
    const BasisTable t = make_table(q, z, grid);
    std::vector<double> metric;
    TailPair hp;
    return solve_forward(q, t, grid, 0.0, 1.0, options, "solve_theta", metric, hp);
}

std::pair<SolutionProfile, SolutionProfile> solve_sc(const Potential& q, double z, const Grid& grid,
                                                     const SolveOptions& options) {
    const BasisTable t = make_table(q, z, grid);
    const BasisValues& b0 = t.at0;
    std::vector<double> metric;
    TailPair hs, hc;
    // s0 = -theta0(0) psi0 + psi0(0) theta0, c0 = theta0'(0) psi0 - psi0'(0) theta0.
    SolutionProfile s = solve_forward(q, t, grid, -b0.theta0, b0.psi0, options, "solve_sc(s)", metric, hs);
    SolutionProfile c = solve_forward(q, t, grid, b0.theta0_prime, -b0.psi0_prime, options, "solve_sc(c)", metric, hc);
    if (!options.z_derivative) return {std::move(s), std::move(c)};

    // s_dot = s0_dot + int_0^x dJ0/dz q s + int_0^x J0 q s_dot, s0_dot = c0 - s0'.
    const std::size_t n = grid.size();
    Scratch scratch;
    TailPair hsd;
    heads(t, grid, s.values, t.dpsi0, t.dtheta0, hsd, scratch);
    std::vector<double> source(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double c0 = b0.theta0_prime * t.psi0[i] - b0.psi0_prime * t.theta0[i];
        const double s0p = -b0.theta0 * t.dpsi0[i] + b0.psi0 * t.dtheta0[i];
        source[i] = c0 - s0p - t.dtheta0[i] * hs.a[i] + t.dpsi0[i] * hs.b[i] - t.theta0[i] * hsd.a[i] +
                    t.psi0[i] * hsd.b[i];
    }
    TailPair hdot;
    double dot_residual = 0.0;
    picard_forward(t, grid, source, metric, s.z_derivs, hdot, options, dot_residual, "solve_sc(s-dot)");
    s.residual = std::max(s.residual, dot_residual);
    s.z_derivs_prime.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = t.shift[i];
        const double s0 = -b0.theta0 * t.psi0[i] + b0.psi0 * t.theta0[i];
        const double c0p = b0.theta0_prime * t.dpsi0[i] - b0.psi0_prime * t.dtheta0[i];
        const double source_prime = -w * t.theta0[i] * hs.a[i] + w * t.psi0[i] * hs.b[i] - t.dtheta0[i] * hsd.a[i] +
                                    t.dpsi0[i] * hsd.b[i];
        s.z_derivs_prime[i] = c0p - w * s0 + source_prime + t.dtheta0[i] * hdot.a[i] - t.dpsi0[i] * hdot.b[i];
    }
    s.at_zero.z_deriv = b0.s0_dot;  // = 0: s(z, 0) = 0 for every z
    s.at_zero.z_deriv_prime = b0.c0_prime - (-t.z) * b0.s0;
    return {std::move(s), std::move(c)};
}

double ode_residual(const Potential& q, const SolutionProfile& profile, const Grid& grid) {
    const PanelRule& rule = panel_rule(grid.points_per_panel);
    const int m = rule.points;
    double worst = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < grid.panels(); ++j) {
        const double half = 0.5 * (grid.breaks[j + 1] - grid.breaks[j]);
        for (int i = 0; i < m; ++i) {
            double second = 0.0;
            for (int k = 0; k < m; ++k) second += rule.diff(i, k) * profile.derivs[j * m + k];
            second /= half;
            const std::size_t idx = j * m + i;
            const double x = grid.nodes[idx];
            const double w = x - profile.z;
            const double envelope = (1.0 + std::pow(std::abs(w), 0.25)) * std::exp(airy_exponent(w));
            const double r = std::abs(second - (x + q(x) - profile.z) * profile.values[idx]);
            worst = std::max(worst, r * envelope);
            scale = std::max(scale, std::abs(profile.derivs[idx]) * envelope);
        }
    }
    return worst / std::max(scale, 1e-300);
}

}  // namespace stark

#include "stark/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stark/error.hpp"

namespace stark {
namespace {

// Legendre P_0..P_{n} at x.
std::vector<long double> legendre_all(int n, long double x) {
    std::vector<long double> p(static_cast<std::size_t>(n) + 1);
    p[0] = 1.0L;
    if (n >= 1) p[1] = x;
    for (int j = 1; j < n; ++j) p[j + 1] = ((2 * j + 1) * x * p[j] - j * p[j - 1]) / (j + 1);
    return p;
}

PanelRule build_rule(int m) {
    PanelRule rule;
    rule.points = m;
    std::vector<long double> t(m), w(m);
    for (int i = 0; i < m; ++i) {
        // Chebyshev-like initial guess, then Newton on P_m.
        long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (m + 0.5L));
        for (int it = 0; it < 100; ++it) {
            const auto p = legendre_all(m, x);
            const long double dp = m * (x * p[m] - p[m - 1]) / (x * x - 1.0L);
            const long double dx = p[m] / dp;
            x -= dx;
            if (std::abs(dx) < 1e-19L) break;
        }
        const auto p = legendre_all(m, x);
        const long double dp = m * (x * p[m] - p[m - 1]) / (x * x - 1.0L);
        t[i] = x;
        w[i] = 2.0L / ((1.0L - x * x) * dp * dp);
    }
    // Ascending order.
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return t[a] < t[b]; });
    std::vector<long double> ts(m), ws(m);
    for (int i = 0; i < m; ++i) {
        ts[i] = t[order[i]];
        ws[i] = w[order[i]];
    }

    rule.nodes.resize(m);
    rule.weights.resize(m);
    for (int i = 0; i < m; ++i) {
        rule.nodes[i] = static_cast<double>(ts[i]);
        rule.weights[i] = static_cast<double>(ws[i]);
    }

    // l_k(t) = w_k sum_{j<m} (2j+1)/2 P_j(t_k) P_j(t), exact for degree < m.
    std::vector<std::vector<long double>> pk(m);
    for (int k = 0; k < m; ++k) pk[k] = legendre_all(m, ts[k]);
    rule.head_matrix.assign(static_cast<std::size_t>(m) * m, 0.0);
    rule.tail_matrix.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
        const auto ps = legendre_all(m, ts[i]);
        for (int k = 0; k < m; ++k) {
            // int_{-1}^{s} P_0 = s + 1; int_{-1}^{s} P_j = (P_{j+1} - P_{j-1}) / (2j+1).
            long double acc = 0.5L * (ts[i] + 1.0L);
            for (int j = 1; j < m; ++j) acc += 0.5L * pk[k][j] * (ps[j + 1] - ps[j - 1]);
            const long double head = ws[k] * acc;
            rule.head_matrix[i * m + k] = static_cast<double>(head);
            rule.tail_matrix[i * m + k] = static_cast<double>(ws[k] - head);
        }
    }

    // Barycentric differentiation matrix.
    std::vector<long double> bary(m, 1.0L);
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j)
            if (j != k) bary[k] /= (ts[k] - ts[j]);
    rule.diff_matrix.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
        long double diag = 0.0L;
        for (int k = 0; k < m; ++k) {
            if (k == i) continue;
            const long double d = bary[k] / bary[i] / (ts[i] - ts[k]);
            rule.diff_matrix[i * m + k] = static_cast<double>(d);
            diag -= d;
        }
        rule.diff_matrix[i * m + i] = static_cast<double>(diag);
    }
    return rule;
}

void check_error(const char* what, double a, double b, double error, double l1, const QuadratureOptions& opt) {
    const double allowed = std::max(opt.abs_tol, opt.rel_tol * l1);
    if (!(error <= allowed) && error > 1e-15) {
        std::ostringstream msg;
        msg << what << ": error estimate " << error << " exceeds " << allowed << " on [" << a << ", " << b << "]";
        throw NumericError(msg.str());
    }
}

}  // namespace

const PanelRule& panel_rule(int points) {
    if (points < 2 || points > 40) throw DomainError("panel_rule: points must lie in [2, 40]");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<PanelRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[points];
    if (!slot) slot = std::make_unique<PanelRule>(build_rule(points));
    return *slot;
}

double integrate(const Integrand& f, double a, double b, const QuadratureOptions& opt) {
    if (a == b) return 0.0;
    double error = 0.0, l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, opt.max_depth, opt.rel_tol, &error, &l1);
    check_error("integrate", a, b, error, l1, opt);
    return value;
}

double integrate_pieces(const Integrand& f, std::span<const double> breakpoints, const QuadratureOptions& opt) {
    std::vector<double> pts(breakpoints.begin(), breakpoints.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += integrate(f, pts[i], pts[i + 1], opt);
    return total;
}

double integrate_to_infinity(const Integrand& f, double a, const QuadratureOptions& opt) {
    thread_local boost::math::quadrature::exp_sinh<double> integrator;
    double error = 0.0, l1 = 0.0;
    const double value = integrator.integrate([&](double t) { return f(a + t); }, opt.rel_tol, &error, &l1);
    check_error("integrate_to_infinity", a, INFINITY, error, l1, opt);
    return value;
}

}  // namespace stark

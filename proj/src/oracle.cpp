#include "stark/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <lapacke.h>

#include "stark/airy.hpp"
#include "stark/error.hpp"
#include "stark/volterra.hpp"

namespace stark {
namespace {

void check_mesh(double L, double h) {
    if (!(h > 0.0 && h <= 0.02)) throw DomainError("oracle: mesh width h must lie in (0, 0.02]");
    if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("oracle: L must be positive and finite");
    if (std::lround(L / h) < 3) throw DomainError("oracle: L / h too small");
}

// k-th eigenvalue (0-based) by bisection, given lo <= lambda_k < hi.
double bisect(const DiscreteOperator& op, std::size_t k, double lo, double hi) {
    while (hi - lo > 1e-12 * (1.0 + std::abs(lo)) && hi - lo > 5e-13) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (op.count_below(mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> eigenvalues(const DiscreteOperator& op, int count) {
    const std::size_t want = static_cast<std::size_t>(count);
    if (want > op.size()) throw DomainError("oracle_spectrum: count exceeds the matrix dimension");
    // Gershgorin lower bound; the upper bound grows until it holds `count` eigenvalues.
    double lo = *std::min_element(op.diag.begin(), op.diag.end()) - 2.0 * std::abs(op.offdiag);
    double hi = lo + 1.0;
    while (op.count_below(hi) < want) hi = lo + 2.0 * (hi - lo);
    std::vector<double> out(want);
    for (std::size_t k = 0; k < want; ++k) {
        out[k] = bisect(op, k, lo, hi);
        lo = out[k] - 1e-9 * (1.0 + std::abs(out[k]));
    }
    return out;
}

// Unit eigenvector for an accurate eigenvalue by inverse iteration.
std::vector<double> eigenvector(const DiscreteOperator& op, double lambda) {
    const lapack_int n = static_cast<lapack_int>(op.size());
    std::vector<double> v(op.size(), 1.0);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.001 * static_cast<double>(i % 7);
    // A shift just off the eigenvalue keeps the factorization nonsingular.
    const double shift = lambda + 1e-10 * (1.0 + std::abs(lambda));
    for (int it = 0; it < 3; ++it) {
        std::vector<double> d(op.size()), dl(op.size() - 1, op.offdiag), du(op.size() - 1, op.offdiag);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = op.diag[i] - shift;
        const lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, dl.data(), d.data(), du.data(), v.data(), n);
        if (info != 0) {
            std::ostringstream msg;
            msg << "oracle: tridiagonal solve failed (info " << info << ")";
            throw NumericError(msg.str());
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

void check_tail_mass(const std::vector<double>& v, int n, double L) {
    const std::size_t start = v.size() - v.size() / 10;
    double mass = 0.0;
    for (std::size_t i = start; i < v.size(); ++i) mass += v[i] * v[i];
    if (mass > 1e-8) {
        std::ostringstream msg;
        msg << "oracle: eigenvector " << n << " carries mass " << mass << " in the last tenth of [0, " << L
            << "]; the domain is too short";
        throw TruncationError(msg.str());
    }
}

double discrete_kappa(const std::vector<double>& v, double h) {
    const double slope = (4.0 * v[0] - v[1]) / (2.0 * h);
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::log(slope * slope / (h * sum));
}

}  // namespace

DiscreteOperator DiscreteOperator::build(const Potential& q, double L, double h) {
    check_mesh(L, h);
    DiscreteOperator op;
    op.L = L;
    op.h = h;
    const long n = std::lround(L / h) - 1;
    op.diag.resize(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double x = static_cast<double>(i + 1) * h;
        op.diag[static_cast<std::size_t>(i)] = 2.0 / (h * h) + x + q(x);
    }
    op.offdiag = -1.0 / (h * h);
    return op;
}

std::size_t DiscreteOperator::count_below(double lambda) const {
    const double b2 = offdiag * offdiag;
    const double tiny = std::numeric_limits<double>::min() * 1e10;
    std::size_t negatives = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        d = diag[i] - lambda - (i == 0 ? 0.0 : b2 / d);
        if (d == 0.0) d = -tiny;
        if (d < 0.0) ++negatives;
    }
    return negatives;
}

std::vector<double> oracle_spectrum(const Potential& q, double L, double h, int count) {
    if (count < 1) throw DomainError("oracle_spectrum: count must be >= 1");
    const DiscreteOperator op = DiscreteOperator::build(q, L, h);
    std::vector<double> values = eigenvalues(op, count);
    check_tail_mass(eigenvector(op, values.back()), count, L);
    return values;
}

double oracle_norming(const Potential& q, double L, double h, int n) {
    if (n < 1) throw DomainError("oracle_norming: n must be >= 1");
    const DiscreteOperator op = DiscreteOperator::build(q, L, h);
    const double lambda = eigenvalues(op, n).back();
    const std::vector<double> v = eigenvector(op, lambda);
    check_tail_mass(v, n, L);
    return discrete_kappa(v, h);
}

DiscreteSpectrum oracle_solve(const Potential& q, double L, double h, int count) {
    if (count < 1) throw DomainError("oracle_solve: count must be >= 1");
    const DiscreteOperator op = DiscreteOperator::build(q, L, h);
    DiscreteSpectrum out;
    out.lambda = eigenvalues(op, count);
    for (int n = 1; n <= count; ++n) {
        const std::vector<double> v = eigenvector(op, out.lambda[static_cast<std::size_t>(n - 1)]);
        if (n == count) check_tail_mass(v, n, L);
        out.kappa.push_back(discrete_kappa(v, h));
    }
    return out;
}

RichardsonResult richardson(const std::vector<std::pair<double, double>>& values, int order) {
    if (values.size() < 3) throw DomainError("richardson: at least three mesh levels are required");
    if (order < 1) throw DomainError("richardson: order must be >= 1");
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double ratio = values[i - 1].first / values[i].first;
        if (std::abs(ratio - 2.0) > 1e-9) throw DomainError("richardson: consecutive mesh widths must halve");
    }
    const std::size_t m = values.size();
    std::vector<std::vector<double>> t(m);
    for (std::size_t i = 0; i < m; ++i) {
        t[i].push_back(values[i].second);
        for (std::size_t j = 1; j <= i; ++j) {
            const double factor = std::pow(2.0, order + 2.0 * static_cast<double>(j - 1)) - 1.0;
            t[i].push_back(t[i][j - 1] + (t[i][j - 1] - t[i - 1][j - 1]) / factor);
        }
    }
    RichardsonResult r;
    r.value = t[m - 1][m - 1];
    r.error_estimate = std::abs(t[m - 1][m - 1] - t[m - 1][m - 2]);
    const double d1 = values[0].second - values[1].second;
    const double d2 = values[1].second - values[2].second;
    r.observed_order = (d1 != 0.0 && d2 != 0.0) ? std::log2(std::abs(d1 / d2)) : static_cast<double>(order);
    if (std::abs(r.observed_order - order) > 0.3 * order) {
        std::ostringstream msg;
        msg << "observed convergence order " << r.observed_order << " differs from the assumed " << order;
        r.warning = msg.str();
    }
    return r;
}

double oracle_length(const Potential& q, double lambda_max, double margin) {
    const double x = truncation_point(q, lambda_max, 1e-12) + margin;
    return 0.25 * std::ceil(x / 0.25);
}

OracleResult oracle_extrapolated(const Potential& q, int count, const OracleOptions& options) {
    if (count < 1) throw DomainError("oracle_extrapolated: count must be >= 1");
    if (options.steps.size() < 3) throw DomainError("oracle_extrapolated: need at least three mesh levels");
    // Upper estimate of lambda_count: the unperturbed value plus sup|q|.
    const double lambda_max = -airy_zero(count).a_n + q.sup_abs();
    OracleResult out;
    out.L = oracle_length(q, lambda_max, options.margin);
    std::vector<DiscreteSpectrum> levels;
    for (double h : options.steps) levels.push_back(oracle_solve(q, out.L, h, count));
    for (int n = 0; n < count; ++n) {
        std::vector<std::pair<double, double>> lam, kap;
        for (std::size_t l = 0; l < levels.size(); ++l) {
            lam.emplace_back(options.steps[l], levels[l].lambda[static_cast<std::size_t>(n)]);
            kap.emplace_back(options.steps[l], levels[l].kappa[static_cast<std::size_t>(n)]);
        }
        out.lambda.push_back(richardson(lam, 2));
        out.kappa.push_back(richardson(kap, 2));
    }
    return out;
}

}  // namespace stark

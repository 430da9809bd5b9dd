#include "stark/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/tools/toms748_solve.hpp>

#include "stark/airy.hpp"
#include "stark/asymptotics.hpp"
#include "stark/basis.hpp"
#include "stark/error.hpp"

namespace stark {
namespace {

// A converged eigenvalue together with the grid and psi profile it came from.
struct EigenState {
    EigenRecord record;
    Grid grid;
    SolutionProfile psi;
};

double shoot(const Potential& q, double z, const Grid& grid, SolveOptions opt) {
    opt.z_derivative = false;
    return solve_psi(q, z, grid, opt).at_zero.value;
}

int count_sign_changes(const std::vector<double>& v) {
    int changes = 0;
    double last = 0.0;
    for (double x : v) {
        if (x == 0.0) continue;
        if (last != 0.0 && (x > 0.0) != (last > 0.0)) ++changes;
        last = x;
    }
    return changes;
}

double direct_norm(const SolutionProfile& psi, const Grid& grid) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) sum += grid.weights[i] * psi.values[i] * psi.values[i];
    // Beyond x_max, psi^2 decays at least like exp(-2 sqrt(x_max - z) (x - x_max)).
    const double last = psi.values.back();
    sum += last * last / (2.0 * std::sqrt(std::max(grid.x_max - psi.z, 1.0)));
    return sum;
}

EigenState solve_state(const Potential& q, int n, const SpectrumOptions& options) {
    if (n < 1) throw DomainError("locate_eigenvalue: n must be >= 1");
    const double center = -airy_zero(n).a_n;
    const double correction = lambda_prediction(q, n) - center;
    double delta = std::max(localization_radius(n), 2.0 * std::abs(correction));

    Grid grid;
    double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
    bool found = false;
    for (int d = 0; d <= options.max_doublings; ++d, delta *= 2.0) {
        lo = center - delta;
        hi = center + delta;
        grid = make_grid(q, lo, hi, options.grid);
        flo = shoot(q, lo, grid, options.solve);
        fhi = shoot(q, hi, grid, options.solve);
        if ((flo > 0.0) != (fhi > 0.0) || flo == 0.0 || fhi == 0.0) {
            found = true;
            break;
        }
    }
    if (!found) {
        std::ostringstream msg;
        msg << "locate_eigenvalue(n=" << n << "): no sign change of psi(q, ., 0) on [" << lo << ", " << hi
            << "] after " << options.max_doublings
            << " doublings; an even number of eigenvalues (a neighbour) lies in the bracket";
        throw BracketError(msg.str());
    }

    double lambda = 0.0;
    if (flo == 0.0) {
        lambda = lo;
    } else if (fhi == 0.0) {
        lambda = hi;
    } else {
        const double tol = options.root_tol;
        auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol * (1.0 + std::abs(a)); };
        std::uintmax_t iterations = 200;
        const auto root = boost::math::tools::toms748_solve(
            [&](double z) { return shoot(q, z, grid, options.solve); }, lo, hi, flo, fhi, stop, iterations);
        if (iterations >= 200) throw NumericError("locate_eigenvalue: root refinement did not terminate");
        lambda = 0.5 * (root.first + root.second);
    }

    SolveOptions full = options.solve;
    full.z_derivative = true;
    SolutionProfile psi = solve_psi(q, lambda, grid, full);
    // One Newton step with the exact slope psi_dot removes the bisection residue.
    if (psi.at_zero.z_deriv != 0.0) {
        const double step = -psi.at_zero.value / psi.at_zero.z_deriv;
        const double candidate = lambda + step;
        if (std::abs(step) <= 1e-6 * (1.0 + std::abs(lambda)) && candidate > lo && candidate < hi) {
            SolutionProfile refined = solve_psi(q, candidate, grid, full);
            if (std::abs(refined.at_zero.value) < std::abs(psi.at_zero.value)) {
                lambda = candidate;
                psi = std::move(refined);
            }
        }
    }

    EigenRecord r;
    r.n = n;
    r.lambda = lambda;
    r.bracket_lo = lo;
    r.bracket_hi = hi;
    r.shoot_residual = std::abs(psi.at_zero.value);
    r.psi_prime = psi.at_zero.deriv;
    r.psi_dot = psi.at_zero.z_deriv;
    r.psi_dot_prime = psi.at_zero.z_deriv_prime;
    if (r.psi_dot == 0.0 || !(r.psi_prime * r.psi_dot < 0.0)) {
        std::ostringstream msg;
        msg << "locate_eigenvalue(n=" << n << "): degenerate residue data psi'=" << r.psi_prime
            << " psi_dot=" << r.psi_dot << " at lambda=" << lambda;
        throw NumericError(msg.str());
    }
    r.norm_sq = -r.psi_prime * r.psi_dot;
    r.norm_sq_direct = direct_norm(psi, grid);
    r.norm_gap = std::abs(r.norm_sq - r.norm_sq_direct) / r.norm_sq;
    r.kappa = std::log(-r.psi_prime / r.psi_dot);
    r.kappa_alt = std::log(r.psi_prime * r.psi_prime / r.norm_sq_direct);
    r.sign_changes = count_sign_changes(psi.values);
    if (r.sign_changes != n - 1) {
        std::ostringstream msg;
        msg << "locate_eigenvalue(n=" << n << "): eigenfunction at lambda=" << lambda << " has " << r.sign_changes
            << " sign changes, expected " << n - 1 << "; the bracket [" << lo << ", " << hi
            << "] captured a neighbouring eigenvalue";
        throw BracketError(msg.str());
    }
    return {std::move(r), std::move(grid), std::move(psi)};
}

SpectrumOptions with_breaks(SpectrumOptions options, const Potential& v) {
    const auto extra = v.breakpoints();
    options.grid.extra_breakpoints.insert(options.grid.extra_breakpoints.end(), extra.begin(), extra.end());
    return options;
}

double pair_with(const Grid& grid, const Potential& v, const std::vector<double>& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) sum += grid.weights[i] * f[i] * v(grid.nodes[i]);
    return sum;
}

double psi_ddot(const Potential& q, double lambda, const Grid& grid, const SolveOptions& solve, double h) {
    const double up = solve_psi(q, lambda + h, grid, solve).at_zero.z_deriv;
    const double down = solve_psi(q, lambda - h, grid, solve).at_zero.z_deriv;
    return (up - down) / (2.0 * h);
}

}  // namespace

double localization_radius(int n) {
    if (n < 1) throw DomainError("localization_radius: n must be >= 1");
    return 4.0 * std::pow(1.5 * std::numbers::pi * n, -2.0 / 3.0 + 0.05);
}

EigenRecord locate_eigenvalue(const Potential& q, int n, const SpectrumOptions& options) {
    return solve_state(q, n, options).record;
}

std::vector<EigenRecord> locate_eigenvalues(const Potential& q, int n_min, int n_max, const SpectrumOptions& options,
                                            unsigned threads) {
    if (n_min < 1 || n_max < n_min) throw DomainError("locate_eigenvalues: need 1 <= n_min <= n_max");
    const int count = n_max - n_min + 1;
    std::vector<EigenRecord> out(static_cast<std::size_t>(count));
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(count));

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                out[static_cast<std::size_t>(i)] = locate_eigenvalue(q, n_min + i, options);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

NormPair norm_sq_psi(const Potential& q, const EigenRecord& record, const SpectrumOptions& options) {
    const Grid grid = make_grid(q, record.bracket_lo, record.bracket_hi, options.grid);
    SolveOptions solve = options.solve;
    solve.z_derivative = true;
    const SolutionProfile psi = solve_psi(q, record.lambda, grid, solve);
    NormPair out;
    out.direct = direct_norm(psi, grid);
    out.identity = -psi.at_zero.deriv * psi.at_zero.z_deriv;
    out.gap = std::abs(out.direct - out.identity) / std::abs(out.identity);
    if (!(out.gap <= 1e-5)) {
        std::ostringstream msg;
        msg << "norm_sq_psi(n=" << record.n << "): direct " << out.direct << " and residue identity " << out.identity
            << " differ by " << out.gap << " relative";
        throw NumericError(msg.str());
    }
    return out;
}

double lambda_directional_derivative(const Potential& q, int n, const Potential& v, const SpectrumOptions& options) {
    if (v.is_zero()) return 0.0;
    const EigenState st = solve_state(q, n, with_breaks(options, v));
    std::vector<double> sq(st.psi.values.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = st.psi.values[i] * st.psi.values[i];
    return pair_with(st.grid, v, sq) / st.record.norm_sq;
}

double kappa_directional_derivative(const Potential& q, int n, const Potential& v, const SpectrumOptions& options) {
    if (v.is_zero()) return 0.0;
    const SpectrumOptions opt = with_breaks(options, v);
    const EigenState st = solve_state(q, n, opt);
    const EigenRecord& r = st.record;
    SolveOptions solve = opt.solve;
    solve.z_derivative = true;
    const auto [s, c] = solve_sc(q, r.lambda, st.grid, solve);

    const std::size_t m = st.grid.size();
    std::vector<double> sq(m), kernel(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double psi = st.psi.values[i];
        sq[i] = psi * psi;
        // Variations of psi'(0) and psi_dot(0) under q -> q + t v.
        kernel[i] = -c.values[i] * psi / r.psi_prime -
                    (s.z_derivs[i] * psi + s.values[i] * st.psi.z_derivs[i]) / r.psi_dot;
    }
    const double a_part = pair_with(st.grid, v, kernel);
    const double d_lambda = pair_with(st.grid, v, sq) / r.norm_sq;

    const double h = 1e-4 * (1.0 + std::abs(r.lambda));
    auto assemble = [&](double step) {
        const double ddot = psi_ddot(q, r.lambda, st.grid, solve, step);
        const double b_part = r.psi_dot_prime / r.psi_prime - ddot / r.psi_dot;
        return a_part + b_part * d_lambda;
    };
    const double coarse = assemble(h);
    const double fine = assemble(0.5 * h);
    const double scale = std::max({std::abs(fine), std::abs(a_part), 1e-300});
    if (std::abs(fine - coarse) > 1e-3 * scale) {
        std::ostringstream msg;
        msg << "kappa_directional_derivative(n=" << n << "): z-differencing unstable, step halving moved the result from "
            << coarse << " to " << fine;
        throw NumericError(msg.str());
    }
    return fine;
}

std::vector<double> scan_negative_eigenvalues(const Potential& q, const SpectrumOptions& options) {
    const double lo = -10.0 * (1.0 + q.sup_abs());
    constexpr double hi = 0.0;
    const Grid grid = make_grid(q, lo, hi, options.grid);
    constexpr double step = 0.05;
    const int samples = static_cast<int>(std::ceil((hi - lo) / step));
    std::vector<double> found;
    double z_prev = lo;
    double f_prev = shoot(q, lo, grid, options.solve);
    for (int i = 1; i <= samples; ++i) {
        const double z = std::min(hi, lo + i * step);
        const double f = shoot(q, z, grid, options.solve);
        if ((f > 0.0) != (f_prev > 0.0)) {
            const double tol = options.root_tol;
            auto stop = [tol](double a, double b) { return std::abs(b - a) <= tol * (1.0 + std::abs(a)); };
            std::uintmax_t iterations = 200;
            const auto root = boost::math::tools::toms748_solve(
                [&](double x) { return shoot(q, x, grid, options.solve); }, z_prev, z, f_prev, f, stop, iterations);
            found.push_back(0.5 * (root.first + root.second));
        }
        z_prev = z;
        f_prev = f;
    }
    return found;
}

int localization_onset(const std::vector<EigenRecord>& records) {
    if (records.empty()) return 1;
    int onset = records.front().n;
    for (const EigenRecord& r : records) {
        if (std::abs(r.lambda + airy_zero(r.n).a_n) > localization_radius(r.n)) onset = r.n + 1;
    }
    return onset;
}

BasisDiagnostic basis_diagnostic(const EigenRecord& record) {
    const BasisValues b = basis_eval(record.lambda, 0.0);
    BasisDiagnostic d;
    d.n = record.n;
    d.alpha = b.psi0;
    const double sign = (record.n % 2 == 1) ? 1.0 : -1.0;
    d.beta_normalized = b.psi0_prime * sign * std::pow(1.5 * std::numbers::pi * record.n, -1.0 / 6.0);
    return d;
}

}  // namespace stark

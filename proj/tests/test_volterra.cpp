#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/airy.hpp>

#include "stark/airy.hpp"
#include "stark/basis.hpp"
#include "stark/error.hpp"
#include "stark/spectrum.hpp"
#include "stark/volterra.hpp"

using namespace stark;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("truncation point") {
    const Potential zero;
    const double base = std::pow(1.5 * std::log(1e12), 2.0 / 3.0);
    CHECK(base == doctest::Approx(11.99).epsilon(2e-3));
    const double x0 = truncation_point(zero, 0.0, 1e-12);
    CHECK(x0 >= base);
    CHECK(x0 <= base + 1.0);
    CHECK(std::exp(-airy_exponent(x0)) <= 1e-12);
    CHECK(truncation_point(zero, 0.0, 0.5e-12) >= x0);
    CHECK(truncation_point(zero, 30.0, 1e-12) >= 30.0 + base);
    CHECK_THROWS_AS(truncation_point(zero, 0.0, 1e-3), DomainError);
    CHECK_THROWS_AS(truncation_point(zero, 0.0, 0.0), DomainError);
    // The perturbation's tail, weighted by the Airy decay, is below tolerance past x_max.
    const Potential slow = alg_decay(0.5, 1.5, 1.5);
    const double xs = truncation_point(slow, 5.0, 1e-12);
    CHECK(slow.tail_bound(xs) * std::exp(-airy_exponent(xs - 5.0)) <= 1e-12 * (1 + slow.sup_abs()));
}

TEST_CASE("grid structure") {
    const Potential q = bump(0.4, 2.0, 1.0);
    const Grid g = make_grid(q, 5.0, 5.5);
    CHECK(g.breaks.front() == 0.0);
    CHECK(g.breaks.back() == g.x_max);
    CHECK(std::is_sorted(g.nodes.begin(), g.nodes.end()));
    CHECK(std::adjacent_find(g.nodes.begin(), g.nodes.end()) == g.nodes.end());
    for (double p : {1.0, 3.0})
        CHECK(std::find(g.breaks.begin(), g.breaks.end(), p) != g.breaks.end());
    double total = 0.0;
    for (double w : g.weights) total += w;
    CHECK(total == doctest::Approx(g.x_max).epsilon(1e-13));
    // The turning region |x - z| <= 2 holds at least four times the panels of the unrefined grading.
    GridOptions plain;
    plain.turning_refinement = 1.0;
    const Grid g0 = make_grid(exp_decay(0.3, 1.0), 6.0, 6.0, plain);
    const Grid g1 = make_grid(exp_decay(0.3, 1.0), 6.0, 6.0);
    auto inside = [](const Grid& grid) {
        int count = 0;
        for (std::size_t j = 0; j < grid.panels(); ++j)
            if (std::abs(0.5 * (grid.breaks[j] + grid.breaks[j + 1]) - 6.0) < 2.0) ++count;
        return count;
    };
    CHECK(inside(g1) >= 3.5 * inside(g0));
    CHECK(g1.baseline_spacing > 0.0);
    CHECK_THROWS_AS(make_grid(q, 3.0, 2.0), DomainError);
}

TEST_CASE("q = 0 reproduces the unperturbed basis") {
    const Potential zero;
    const double z = 3.7;
    const Grid g = make_grid(zero, z, z);
    const SolutionProfile psi = solve_psi(zero, z, g);
    const SolutionProfile theta = solve_theta(zero, z, g);
    const auto [s, c] = solve_sc(zero, z, g);
    CHECK(psi.iterations == 1);
    for (std::size_t i = 0; i < g.size(); i += 37) {
        const BasisValues b = basis_eval(z, g.nodes[i]);
        CHECK(psi.values[i] == doctest::Approx(b.psi0).epsilon(1e-14).scale(1e-300));
        CHECK(psi.z_derivs[i] == doctest::Approx(-b.psi0_prime).epsilon(1e-12).scale(1e-300));
        CHECK(theta.values[i] == doctest::Approx(b.theta0).epsilon(1e-14));
        CHECK(s.values[i] == doctest::Approx(b.s0).epsilon(1e-12).scale(1e-12 * std::abs(b.theta0)));
        CHECK(c.values[i] == doctest::Approx(b.c0).epsilon(1e-12).scale(1e-12 * std::abs(b.theta0)));
        CHECK(s.z_derivs[i] == doctest::Approx(b.s0_dot).epsilon(1e-10).scale(1e-10 * std::abs(b.theta0)));
    }
}

TEST_CASE("Wronskians of the perturbed solutions are constant") {
    for (const Potential& q : {exp_decay(0.3, 1.0), alg_decay(0.5, 3.0), bump(0.4, 2.0, 1.0)}) {
        for (double z : {-1.0, 2.5, 14.0}) {
            const Grid g = make_grid(q, z - 0.1, z + 0.1);
            SolveOptions o;
            o.z_derivative = false;
            const SolutionProfile psi = solve_psi(q, z, g, o), theta = solve_theta(q, z, g, o);
            const auto [s, c] = solve_sc(q, z, g, o);
            // Far out s and c both grow like theta0, so the deviation is measured against the size of the terms.
            const double w0 = psi.at_zero.value * theta.at_zero.deriv - psi.at_zero.deriv * theta.at_zero.value;
            double wdev = 0.0, scdev = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double a = psi.values[i] * theta.derivs[i], b = psi.derivs[i] * theta.values[i];
                wdev = std::max(wdev, std::abs(a - b - w0) / (std::abs(a) + std::abs(b)));
                const double u = s.values[i] * c.derivs[i], v = s.derivs[i] * c.values[i];
                scdev = std::max(scdev, std::abs(u - v + 1.0) / (std::abs(u) + std::abs(v)));
            }
            CHECK(wdev <= 1e-8);
            CHECK(scdev <= 1e-8);
            CHECK(psi.residual <= 1e-9);
            CHECK(theta.residual <= 1e-9);
            CHECK(ode_residual(q, psi, g) <= 1e-5);
            CHECK(ode_residual(q, s, g) <= 1e-5);
            CHECK(ode_residual(q, theta, g) <= 1e-5);
            if (q.terms().front().family != Family::alg_decay) {
                CHECK(psi.tail_bound <= 1e-12);
                // W(psi, theta) = 1 + int theta0 psi q. Past x_max psi is psi0 to high relative accuracy.
                double integral = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i)
                    integral += g.weights[i] * basis_eval(z, g.nodes[i]).theta0 * psi.values[i] * q(g.nodes[i]);
                auto tail = [&](double y) {
                    return std::numbers::pi * boost::math::airy_ai(y - z) * boost::math::airy_bi(y - z) * q(y);
                };
                integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(tail, g.x_max, g.x_max + 40.0,
                                                                                         15, 1e-13);
                CHECK(w0 == doctest::Approx(1.0 + integral).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("psi(0) agrees with an independent ODE integration") {
    // Backward DOP853 integration (rtol 1e-13) of -f'' + (x + 0.3 e^{-x} - z) f = 0 from x = z + 14 with
    // f = sqrt(pi) Ai(x - z) there; the exponential tail beyond contributes below 1e-8.
    const Potential q = exp_decay(0.3, 1.0);
    const struct {
        double z, psi, dpsi;
    } refs[] = {{2.5, -0.11334648720207607, 1.230681114623315}, {14.0, -0.46478990766136313, 0.8549839125465932}};
    for (const auto& r : refs) {
        const SolutionProfile psi = solve_psi(q, r.z, make_grid(q, r.z, r.z));
        CHECK(psi.at_zero.value == doctest::Approx(r.psi).epsilon(1e-8));
        CHECK(psi.at_zero.deriv == doctest::Approx(r.dpsi).epsilon(1e-8));
        // theta is seeded with theta0 at the origin, so W(psi, theta) is not 1 here.
        const BasisValues b = basis_eval(r.z, 0.0);
        CHECK(std::abs(psi.at_zero.value * b.theta0_prime - psi.at_zero.deriv * b.theta0 - 1.0) > 1e-3);
    }
}

TEST_CASE("z-derivatives match centered differences") {
    const Potential q = exp_decay(0.3, 1.0);
    const double z = 6.1, h = 1e-4;
    const Grid g = make_grid(q, z - 0.2, z + 0.2);
    const SolutionProfile psi = solve_psi(q, z, g), up = solve_psi(q, z + h, g), down = solve_psi(q, z - h, g);
    const auto [s, c] = solve_sc(q, z, g);
    const auto [sp, cp] = solve_sc(q, z + h, g);
    const auto [sm, cm] = solve_sc(q, z - h, g);
    double scale = 0.0, worst = 0.0, worst_prime = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) scale = std::max(scale, std::abs(psi.z_derivs[i]));
    for (std::size_t i = 0; i < g.size(); ++i) {
        worst = std::max(worst, std::abs((up.values[i] - down.values[i]) / (2 * h) - psi.z_derivs[i]));
        worst_prime = std::max(worst_prime, std::abs((up.derivs[i] - down.derivs[i]) / (2 * h) - psi.z_derivs_prime[i]));
    }
    CHECK(worst <= 1e-5 * scale);
    CHECK(worst_prime <= 1e-5 * scale * 4);
    CHECK((up.at_zero.value - down.at_zero.value) / (2 * h) == doctest::Approx(psi.at_zero.z_deriv).epsilon(1e-5));
    CHECK((up.at_zero.deriv - down.at_zero.deriv) / (2 * h) ==
          doctest::Approx(psi.at_zero.z_deriv_prime).epsilon(1e-5));
    const std::size_t k = g.size() / 4;
    CHECK((sp.values[k] - sm.values[k]) / (2 * h) == doctest::Approx(s.z_derivs[k]).epsilon(1e-5));
    CHECK((sp.derivs[k] - sm.derivs[k]) / (2 * h) == doctest::Approx(s.z_derivs_prime[k]).epsilon(1e-5));
}

TEST_CASE("psi decomposes along s and c; at an eigenvalue psi = psi'(0) s") {
    const Potential q = bump(0.4, 2.0, 1.0);
    const double z = 4.0;
    const Grid g = make_grid(q, z, z);
    const SolutionProfile psi = solve_psi(q, z, g);
    const auto [s, c] = solve_sc(q, z, g);
    for (std::size_t i = 0; i < g.size(); i += 11) {
        if (g.nodes[i] > z + 2.0) break;  // s and c grow; the combination cancels there
        CHECK(psi.at_zero.value * c.values[i] + psi.at_zero.deriv * s.values[i] ==
              doctest::Approx(psi.values[i]).epsilon(1e-9).scale(1e-9));
    }
    const EigenRecord r = locate_eigenvalue(q, 3);
    const Grid ge = make_grid(q, r.bracket_lo, r.bracket_hi);
    const SolutionProfile pe = solve_psi(q, r.lambda, ge);
    const auto [se, ce] = solve_sc(q, r.lambda, ge);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < ge.size(); ++i) {
        if (ge.nodes[i] > r.lambda + 4.0) break;
        worst = std::max(worst, std::abs(se.values[i] * pe.at_zero.deriv - pe.values[i]));
        scale = std::max(scale, std::abs(pe.values[i]));
    }
    CHECK(worst <= 1e-7 * scale);
}

TEST_CASE("first-order deviation from the unperturbed solution is bounded by omega") {
    const Potential q = exp_decay(0.2, 1.0);
    const double z = -airy_zero(1).a_n;
    const Grid g = make_grid(q, z, z);
    const SolutionProfile psi = solve_psi(q, z, g);
    const double dev = std::abs(psi.at_zero.value - basis_eval(z, 0.0).psi0);
    const double w = omega(q, z);
    CHECK(dev <= 2.0 * w / (1.0 + std::pow(z, 0.25)) * std::exp(2.0 * w));
    // Small-coupling structure: the deviation of theta from theta0 is linear in c.
    const Grid g2 = make_grid(exp_decay(0.01, 1.0), 3.0, 3.0);
    auto deviation = [&](double c) {
        const Potential qc = exp_decay(c, 1.0);
        SolveOptions o;
        o.z_derivative = false;
        const SolutionProfile t = solve_theta(qc, 3.0, g2, o), t0 = solve_theta(Potential(), 3.0, g2, o);
        return max_abs_diff(t.values, t0.values);
    };
    CHECK(deviation(0.01) / deviation(0.005) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("refinement and domain extension leave psi(0) unchanged within the tail bound") {
    for (const Potential& q : {alg_decay(0.5, 3.0), alg_decay(0.5, 1.5, 1.5), exp_decay(0.3, 1.0)}) {
        for (double z : {2.0, 9.0}) {
            const Grid g = make_grid(q, z, z);
            GridOptions fine;
            fine.resolution = 0.25;
            GridOptions longer;
            longer.tail_tol = 1e-18;
            SolveOptions o;
            o.z_derivative = false;
            const SolutionProfile a = solve_psi(q, z, g, o);
            const SolutionProfile b = solve_psi(q, z, make_grid(q, z, z, fine), o);
            const SolutionProfile c = solve_psi(q, z, make_grid(q, z, z, longer), o);
            CHECK(std::abs(a.at_zero.value - b.at_zero.value) <= 1e-11);
            CHECK(std::abs(a.at_zero.value - c.at_zero.value) <= a.tail_bound * std::abs(a.at_zero.value) + 1e-13);
        }
    }
}

TEST_CASE("out-of-range spectral parameters are rejected") {
    const Potential q = exp_decay(0.3, 1.0);
    const Grid g = make_grid(q, 0.0, 0.0);
    CHECK_THROWS_AS(solve_psi(q, -95.0, g), NumericError);
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/airy.hpp>

#include "stark/airy.hpp"
#include "stark/basis.hpp"
#include "stark/error.hpp"

using namespace stark;

TEST_CASE("basis values at simple points") {
    const BasisValues b = basis_eval(0.0, 0.0);
    CHECK(b.psi0 == doctest::Approx(std::sqrt(std::numbers::pi) * boost::math::airy_ai(0.0)).epsilon(1e-15));
    const double a1 = airy_zero(1).a_n;
    CHECK(std::abs(basis_eval(-a1, 0.0).psi0) < 1e-14);
}

TEST_CASE("normalization and boundary values hold everywhere") {
    for (double z : {-3.0, 0.0, 2.3, 7.5, 19.0}) {
        const BasisValues at0 = basis_eval(z, 0.0);
        CHECK(at0.s0 == doctest::Approx(0.0).scale(1.0));
        CHECK(at0.s0_prime == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(at0.c0 == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(at0.c0_prime == doctest::Approx(0.0).scale(1.0));
        for (double x : {0.0, 0.4, 2.0, 5.5, 9.0, 14.0}) {
            const BasisValues b = basis_eval(z, x);
            CHECK(b.psi0 * b.theta0_prime - b.psi0_prime * b.theta0 == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(b.s0_dot == doctest::Approx(b.c0 - b.s0_prime).epsilon(1e-14));
            const double u = b.c0 * b.s0_prime, v = b.c0_prime * b.s0;
            CHECK(std::abs(u - v - 1.0) <= 1e-12 * (std::abs(u) + std::abs(v)));
        }
    }
}

TEST_CASE("z-derivatives by centered differences") {
    const double h = 1e-5;
    for (double z : {0.5, 4.0, 11.0}) {
        for (double x : {0.0, 1.0, 3.0, 6.0}) {
            const BasisValues b = basis_eval(z, x), p = basis_eval(z + h, x), m = basis_eval(z - h, x);
            CHECK((p.psi0 - m.psi0) / (2 * h) == doctest::Approx(-b.psi0_prime).epsilon(1e-6).scale(1.0));
            CHECK((p.s0 - m.s0) / (2 * h) == doctest::Approx(b.s0_dot).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("unperturbed solutions satisfy the ODE") {
    const double h = 1e-3;
    for (double z : {1.0, 6.0}) {
        for (double x : {0.5, 2.0, 5.0, 8.0}) {
            const BasisValues m = basis_eval(z, x - h), b = basis_eval(z, x), p = basis_eval(z, x + h);
            const double scale_psi = std::max(std::abs(b.psi0), std::abs(b.psi0_prime));
            const double scale_theta = std::max(std::abs(b.theta0), std::abs(b.theta0_prime));
            CHECK(std::abs(-(p.psi0 - 2 * b.psi0 + m.psi0) / (h * h) + (x - z) * b.psi0) <= 1e-5 * scale_psi * (1 + std::abs(x - z)));
            CHECK(std::abs(-(p.theta0 - 2 * b.theta0 + m.theta0) / (h * h) + (x - z) * b.theta0) <=
                  1e-5 * scale_theta * (1 + std::abs(x - z)));
        }
    }
}

TEST_CASE("green kernel: antisymmetry, diagonal slope and the s0/c0 form") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> zs(-2.0, 15.0), xs(0.0, 12.0);
    for (int i = 0; i < 200; ++i) {
        const double z = zs(rng), x = xs(rng), y = xs(rng);
        CHECK(green0(z, x, y) == doctest::Approx(-green0(z, y, x)).epsilon(1e-13).scale(1e-300));
        CHECK(std::abs(green0(z, x, x)) <= 1e-14);
        // J0(x, y) = s0(x) c0(y) - c0(x) s0(y): any unit-Wronskian pair gives the same kernel.
        const BasisValues bx = basis_eval(z, x), by = basis_eval(z, y);
        const double alt = bx.s0 * by.c0 - bx.c0 * by.s0;
        const double size = std::abs(bx.s0 * by.c0) + std::abs(bx.c0 * by.s0);
        CHECK(std::abs(green0(z, x, y) - alt) <= 1e-12 * size);
    }
    const double h = 1e-5;
    for (double z : {0.0, 3.0, 9.0})
        for (double x : {0.5, 2.0, 7.0})
            CHECK((green0(z, x, x + h) - green0(z, x, x - h)) / (2 * h) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("green kernel stays finite where the factors over- and underflow") {
    const double v = green0(0.0, 150.0, 149.0);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
}

TEST_CASE("envelope bounds on psi0 and theta0") {
    std::vector<double> grid;
    for (int i = 0; i <= 6000; ++i) grid.push_back(-30.0 + 0.01 * i);
    const double c0 = envelope_margin(grid);
    const double sp = std::sqrt(std::numbers::pi);
    for (double z = -5.0; z <= 25.0; z += 1.7) {
        for (double x = 0.0; x <= 25.0; x += 0.33) {
            if (x - z > 25.0) continue;
            const BasisValues b = basis_eval(z, x);
            const Envelope e = envelope(x - z);
            CHECK(std::abs(b.psi0) * e.sigma / e.g_a <= c0 * sp * (1 + 1e-9));
            CHECK(std::abs(b.theta0) * e.sigma / e.g_b <= 2.0 * c0 * sp * (1 + 1e-9));
        }
    }
}

TEST_CASE("basis_eval reports overflow") {
    CHECK_THROWS_AS(basis_eval(0.0, 150.0), NumericError);
}

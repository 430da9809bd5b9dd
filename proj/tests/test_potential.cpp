#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stark/error.hpp"
#include "stark/potential.hpp"

using namespace stark;

TEST_CASE("family validation") {
    CHECK_NOTHROW(exp_decay(1.0, 1.0, 2.0));
    CHECK_THROWS_AS(alg_decay(1.0, 1.0, 2.0), ValidationError);  // needs p > 3/2
    CHECK_NOTHROW(alg_decay(1.0, 1.6, 2.0));
    CHECK_THROWS_AS(exp_decay(1.0, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(exp_decay(1.0, -1.0, 2.0), ValidationError);
    CHECK_THROWS_AS(bump(1.0, 2.0, 0.0, 2.0), ValidationError);
    CHECK_THROWS_AS(make_potential({"cosine", {{"c", 1.0}}, {}, {}, 2.0}), ValidationError);
    CHECK_THROWS_AS(make_potential({"exp", {{"c", 1.0}}, {}, {}, 2.0}), ValidationError);  // missing a
}

TEST_CASE("zero amplitude gives the zero potential") {
    const Potential q = bump(0.0, 2.0, 1.0);
    CHECK(q.is_zero());
    const NormBundle nb = norms(q);
    CHECK(nb.ar_norm == 0.0);
    CHECK(nb.afr_norm == 0.0);
    CHECK(nb.l1_norm == 0.0);
    CHECK(nb.l1_bar == 0.0);
    CHECK(omega(q, 3.0) == 0.0);
}

TEST_CASE("norms of e^{-x} against closed forms") {
    const Potential q = exp_decay(1.0, 1.0, 2.0);
    const NormBundle nb = norms(q);
    // int e^{-2x} (1 + x)^2 = 1/2 + 2/4 + 2/8 by repeated integration by parts.
    CHECK(nb.ar_norm * nb.ar_norm == doctest::Approx(1.25).epsilon(1e-10));
    CHECK(nb.derivative_ar_norm * nb.derivative_ar_norm == doctest::Approx(1.25).epsilon(1e-10));
    CHECK(nb.afr_norm * nb.afr_norm == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(nb.l1_norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nb.l1_bar == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("norm consistency, inclusion bound and homogeneity") {
    for (const Potential& q : {exp_decay(0.3, 1.0), alg_decay(0.5, 3.0), bump(0.4, 2.0, 1.0),
                               alg_decay(0.5, 1.5, 1.5), exp_decay(-2.0, 0.5, 3.0)}) {
        const NormBundle nb = norms(q);
        const double lhs = nb.afr_norm * nb.afr_norm;
        const double rhs = nb.ar_norm * nb.ar_norm + nb.derivative_ar_norm * nb.derivative_ar_norm;
        CHECK(std::abs(lhs - rhs) <= 1e-6 * rhs);
        CHECK(nb.l1_norm <= nb.ar_norm / std::sqrt(q.r() - 1.0) * (1 + 1e-12));
        const NormBundle scaled = norms(-2.5 * q);
        CHECK(scaled.ar_norm == doctest::Approx(2.5 * nb.ar_norm).epsilon(1e-8));
        CHECK(scaled.l1_bar == doctest::Approx(2.5 * nb.l1_bar).epsilon(1e-8));
        CHECK(omega(-2.5 * q, 4.0, true) == doctest::Approx(2.5 * omega(q, 4.0, true)).epsilon(1e-8));
    }
}

TEST_CASE("derivatives are consistent with the values") {
    const double h = 1e-5;
    for (const Potential& q : {exp_decay(0.3, 1.7), alg_decay(0.5, 3.0), bump(0.4, 2.0, 1.0)}) {
        for (double x : {0.1, 0.7, 1.3, 2.2, 2.9, 5.0}) {
            const double fd = (q(x + h) - q(x - h)) / (2 * h);
            CHECK(q.derivative(x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("bump is smooth, compactly supported and reports its breakpoints") {
    const Potential q = bump(0.4, 2.0, 1.0);
    CHECK(q(2.0) == doctest::Approx(0.4));
    CHECK(q(0.99) == 0.0);
    CHECK(q(3.01) == 0.0);
    CHECK(q.support_end() == doctest::Approx(3.0));
    const auto br = q.breakpoints();
    CHECK(std::find(br.begin(), br.end(), 1.0) != br.end());
    CHECK(std::find(br.begin(), br.end(), 3.0) != br.end());
}

TEST_CASE("tabulated potentials") {
    PotentialSpec spec{"table", {}, {0.0, 1.0, 2.0, 3.0, 4.0}, {0.5, 0.3, 0.1, 0.02, 0.0}, 2.0};
    const Potential q = make_potential(spec);
    CHECK(q(0.0) == doctest::Approx(0.5));
    CHECK(q(2.0) == doctest::Approx(0.1));
    CHECK(q(5.0) == 0.0);
    spec.table_y.back() = 0.01;
    CHECK_THROWS_AS(make_potential(spec), ValidationError);
    spec.table_y.back() = 0.0;
    spec.table_x.front() = 0.5;
    CHECK_THROWS_AS(make_potential(spec), ValidationError);
}

TEST_CASE("JSON descriptors round-trip") {
    const auto j = nlohmann::json::parse(R"({"family":"exp","params":{"c":0.3,"a":1},"r":2})");
    const Potential q = potential_from_json(j);
    CHECK(q(0.0) == doctest::Approx(0.3));
    const auto back = potential_spec_to_json(potential_spec_from_json(j));
    CHECK(potential_from_json(back)(1.0) == doctest::Approx(q(1.0)));
    CHECK_THROWS_AS(potential_from_json(nlohmann::json::parse(R"({"family":"alg","params":{"c":1,"p":1},"r":2})")),
                    ValidationError);
    CHECK_THROWS_AS(potential_from_json(nlohmann::json::parse(R"({"params":{}})")), ValidationError);
}

TEST_CASE("omega_r") {
    CHECK(omega_r(2.0, 8) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(omega_r(1.5, 1) == 0.0);
    CHECK(omega_r(1.5, 1000) == doctest::Approx(0.1 * std::sqrt(std::log(1000.0))).epsilon(1e-14));
    CHECK(omega_r(1.5, 1000) == doctest::Approx(0.26283).epsilon(1e-5));
    CHECK_THROWS_AS(omega_r(1.0, 3), DomainError);
    CHECK_THROWS_AS(omega_r(2.0, 0), DomainError);
}

TEST_CASE("omega of a narrow bump far from the origin") {
    // Mass of c exp(1 - 1/(1 - t^2)) over [-w, w] is c w times the unit-bump integral.
    const double w = 0.05, c = 1.0;
    const Potential q = bump(c, 0.5, w);
    const double mass = norms(q).l1_norm;
    CHECK(omega(q, 100.0) == doctest::Approx(mass / std::sqrt(1.0 + 99.5)).epsilon(0.01));
}

TEST_CASE("omega decays like (2 + |z|)^{-1/2}") {
    for (const Potential& q : {exp_decay(1.0, 1.0), alg_decay(0.5, 3.0)}) {
        const double bound = norms(q).ar_norm;
        double lo = 1e300, hi = 0.0;
        for (double z = 10.0; z <= 200.0; z += 10.0) {
            const double v = omega(q, z) * std::sqrt(2.0 + z);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi <= 3.0 * bound);
        CHECK(hi / lo < 2.0);
    }
    const Potential slow = alg_decay(0.5, 1.5, 1.5);
    double hi = 0.0;
    for (double z = 10.0; z <= 200.0; z += 10.0)
        hi = std::max(hi, omega(slow, z) * std::sqrt(2.0 + z) / std::sqrt(std::log(2.0 + z)));
    CHECK(std::isfinite(hi));
    CHECK(hi <= 3.0 * norms(slow).ar_norm);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "ellab/identities.hpp"
#include "ellab/kernel.hpp"
#include "ellab/lattice.hpp"
#include "ellab/random.hpp"
#include "oracles.hpp"

using ellab::cplx;
using ellab::Lattice;

namespace {

double rel(cplx got, cplx want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

const Lattice& square_lattice() {
    static Lattice lat(cplx(0.5, 0.0), cplx(0.0, 0.5));
    return lat;
}

const Lattice& generic_lattice() {
    static Lattice lat(cplx(0.5, 0.0), cplx(0.15, 0.55));
    return lat;
}

} // namespace

TEST_CASE("lattice constants match frozen anchors") {
    const Lattice& sq = square_lattice();
    const double pi = std::acos(-1.0);
    CHECK(rel(sq.eta1(), oracle::sq_eta1) < 1e-14);
    CHECK(std::abs(sq.eta1() - pi / 2.0) < 1e-14);
    CHECK(rel(sq.g2(), oracle::sq_g2) < 1e-14);
    CHECK(std::abs(sq.g3()) < 1e-12);

    const Lattice& gen = generic_lattice();
    CHECK(rel(gen.g2(), oracle::gen_g2) < 1e-14);
    CHECK(rel(gen.g3(), oracle::gen_g3) < 1e-14);
    // Legendre relation between the two quasi-period constants.
    CHECK(std::abs(gen.eta1() * gen.omega_prime() - gen.eta2() * gen.omega() -
                   cplx(0, pi / 2.0)) < 1e-14);
}

TEST_CASE("function values match frozen anchors") {
    const cplx x = oracle::anchor_x;
    const Lattice& sq = square_lattice();
    CHECK(rel(sq.sigma(x), oracle::sq_sigma) < 1e-13);
    CHECK(rel(sq.zeta(x), oracle::sq_zeta) < 1e-13);
    CHECK(rel(sq.wp(x, 0), oracle::sq_wp0) < 1e-13);
    CHECK(rel(sq.wp(x, 1), oracle::sq_wp1) < 1e-13);
    CHECK(rel(sq.wp(x, 2), oracle::sq_wp2) < 1e-13);
    CHECK(rel(sq.wp(x, 3), oracle::sq_wp3) < 1e-13);

    const Lattice& gen = generic_lattice();
    CHECK(rel(gen.sigma(x), oracle::gen_sigma) < 1e-13);
    CHECK(rel(gen.zeta(x), oracle::gen_zeta) < 1e-13);
    CHECK(rel(gen.wp(x, 0), oracle::gen_wp0) < 1e-13);
}

TEST_CASE("theta engine agrees with lattice-sum oracle at random points") {
    for (const Lattice& lat : {square_lattice(), generic_lattice()}) {
        const oracle::LatticeSums ref(lat.omega(), lat.omega_prime());
        CHECK(rel(lat.g2(), ref.g2()) < 1e-13);
        ellab::Rng rng(20240817);
        int tested = 0;
        while (tested < 25) {
            const cplx x = 0.8 * rng.cell_point(lat);
            if (lat.pole_distance(x) < 0.05) continue;
            ++tested;
            CHECK(rel(lat.sigma(x), ref.sigma(x)) < 1e-11);
            CHECK(rel(lat.zeta(x), ref.zeta(x)) < 1e-11);
            for (int o = 0; o <= 3; ++o)
                CHECK(rel(lat.wp(x, o), ref.wp(x, o)) < 1e-11);
        }
    }
}

TEST_CASE("quasi-periodicity and argument reduction") {
    const Lattice& lat = generic_lattice();
    const cplx x(0.213, -0.147);
    const cplx w1 = 2.0 * lat.omega(), w2 = 2.0 * lat.omega_prime();

    CHECK(rel(lat.sigma(x + w1),
              -lat.sigma(x) * std::exp(2.0 * lat.eta1() * (x + lat.omega()))) < 1e-12);
    CHECK(rel(lat.sigma(x + w2),
              -lat.sigma(x) * std::exp(2.0 * lat.eta2() * (x + lat.omega_prime()))) < 1e-12);
    CHECK(std::abs(lat.zeta(x + w1) - lat.zeta(x) - 2.0 * lat.eta1()) < 1e-12);
    CHECK(std::abs(lat.zeta(x + w2) - lat.zeta(x) - 2.0 * lat.eta2()) < 1e-12);
    for (int o = 0; o <= 3; ++o) {
        CHECK(rel(lat.wp(x + w1, o), lat.wp(x, o)) < 1e-12);
        CHECK(rel(lat.wp(x + w2, o), lat.wp(x, o)) < 1e-12);
    }

    // A distant argument reduces to the expected cell with a consistent
    // quasi-period factor.
    const cplx far = x + 7.0 * w1 - 4.0 * w2;
    const ellab::ReducedArgument r = lat.reduce(far);
    CHECK(r.m == 7);
    CHECK(r.m_prime == -4);
    CHECK(std::abs(r.x_reduced - x) < 1e-10);
    CHECK(rel(lat.sigma(far),
              std::exp(r.log_quasi_factor) * lat.sigma(r.x_reduced)) < 1e-12);
    CHECK(std::abs(lat.zeta(far) - lat.zeta(x) - 14.0 * lat.eta1() +
                   8.0 * lat.eta2()) < 1e-10);
    CHECK(rel(lat.wp(far), lat.wp(x)) < 1e-10);
}

TEST_CASE("parity and local behaviour at the origin") {
    const Lattice& lat = generic_lattice();
    const cplx x(0.19, 0.23);
    CHECK(rel(lat.sigma(-x), -lat.sigma(x)) < 1e-13);
    CHECK(rel(lat.zeta(-x), -lat.zeta(x)) < 1e-13);
    CHECK(rel(lat.wp(-x), lat.wp(x)) < 1e-13);
    CHECK(rel(lat.wp(-x, 1), -lat.wp(x, 1)) < 1e-13);

    const cplx eps(1e-4, 5e-5);
    CHECK(std::abs(lat.sigma(eps) / eps - 1.0) < 1e-7);
    CHECK(std::abs(lat.zeta(eps) - 1.0 / eps) < 1e-3);
    CHECK(std::abs(lat.wp(eps) - 1.0 / (eps * eps)) < 1e-2);
}

TEST_CASE("wp satisfies its differential equation") {
    ellab::Rng rng(77);
    for (const Lattice& lat : {square_lattice(), generic_lattice()}) {
        int tested = 0;
        while (tested < 10) {
            const cplx x = 0.8 * rng.cell_point(lat);
            if (lat.pole_distance(x) < 0.05) continue;
            ++tested;
            const cplx w = lat.wp(x), w1 = lat.wp(x, 1);
            const double scale = std::max(1.0, std::abs(w * w * w));
            CHECK(std::abs(w1 * w1 - (4.0 * w * w * w - lat.g2() * w - lat.g3())) /
                      scale < 1e-12);
            CHECK(std::abs(lat.wp(x, 2) - (6.0 * w * w - lat.g2() / 2.0)) / scale <
                  1e-11);
            CHECK(std::abs(lat.wp(x, 3) - 12.0 * w * w1) /
                      std::max(1.0, std::abs(12.0 * w * w1)) < 1e-12);
        }
    }
}

TEST_CASE("pole handling") {
    const Lattice& lat = square_lattice();
    CHECK(lat.sigma(cplx(0.0)) == cplx(0.0));
    CHECK(std::abs(lat.sigma(2.0 * lat.omega())) < 1e-14);
    CHECK_THROWS_AS(lat.zeta(cplx(0.0)), ellab::pole_error);
    CHECK_THROWS_AS(lat.wp(2.0 * lat.omega_prime()), ellab::pole_error);
    CHECK_THROWS_AS(lat.log_sigma(cplx(1e-10, 0.0)), ellab::pole_error);
    CHECK_THROWS_AS(lat.wp(cplx(0.3, 0.1), 4), ellab::config_error);
    CHECK(lat.pole_distance(cplx(1.0, 1.0)) < 1e-12);
}

TEST_CASE("lattice construction rejects bad periods") {
    CHECK_THROWS_AS(Lattice(cplx(0.0), cplx(0.0, 0.5)), ellab::config_error);
    CHECK_THROWS_AS(Lattice(cplx(0.5), cplx(0.25, 0.0)), ellab::config_error);
    CHECK_THROWS_AS(Lattice(cplx(0.5), cplx(0.0, -0.5)), ellab::config_error);
    // Nome too close to the unit circle.
    CHECK_THROWS_AS(Lattice(cplx(0.5), cplx(0.0, 0.005)), ellab::config_error);
}

TEST_CASE("log_sigma folds the quasi-period factor") {
    const Lattice& lat = generic_lattice();
    const cplx x(0.17, 0.06);
    const cplx far = x + 6.0 * lat.omega() - 4.0 * lat.omega_prime();
    CHECK(rel(std::exp(lat.log_sigma(far)), lat.sigma(far)) < 1e-12);
}

TEST_CASE("kernel local expansion has no constant term") {
    const Lattice& lat = generic_lattice();
    const cplx lambda(0.37, 0.21);
    const cplx dir(0.6, 0.8);
    // phi(x) - 1/x ~ -wp(lambda)/2 * x; halving x halves the remainder.
    const cplx e1 = 1e-3 * dir, e2 = 2e-3 * dir;
    const cplx f1 = ellab::phi(lat, e1, lambda) - 1.0 / e1;
    const cplx f2 = ellab::phi(lat, e2, lambda) - 1.0 / e2;
    CHECK(std::abs(f2 / f1 - 2.0) < 0.01);
    CHECK(std::abs(f1 - (-lat.wp(lambda) / 2.0) * e1) < 1e-5);
}

TEST_CASE("kernel quasi-periodicity in x") {
    const Lattice& lat = generic_lattice();
    const cplx lambda(0.37, 0.21), x(0.21, -0.13);
    const cplx factor =
        std::exp(2.0 * (lat.eta1() * lambda - lat.zeta(lambda) * lat.omega()));
    CHECK(rel(ellab::phi(lat, x + 2.0 * lat.omega(), lambda),
              factor * ellab::phi(lat, x, lambda)) < 1e-12);
}

TEST_CASE("kernel derivatives agree with finite differences") {
    const Lattice& lat = generic_lattice();
    const cplx lambda(0.37, 0.21), x(0.23, 0.11);
    const double h = 1e-5;
    for (int o = 1; o <= 3; ++o) {
        const cplx fd = (ellab::phi(lat, x + h, lambda, o - 1) -
                         ellab::phi(lat, x - h, lambda, o - 1)) /
                        (2.0 * h);
        CHECK(rel(ellab::phi(lat, x, lambda, o), fd) < 1e-7);
    }
}

TEST_CASE("stripped kernel gauge factor and small-lambda expansion") {
    const Lattice& lat = generic_lattice();
    const cplx lambda(0.37, 0.21), x(0.23, 0.11);
    const cplx gauge = std::exp(lat.zeta(lambda) * x);
    for (int o = 0; o <= 3; ++o)
        CHECK(rel(ellab::phi_stripped(lat, x, lambda, o),
                  gauge * ellab::phi(lat, x, lambda, o)) < 1e-12);

    // phi_stripped(x, lambda) = 1/lambda + zeta(x) + O(lambda) as lambda -> 0.
    const cplx small(1e-5, 0.0);
    CHECK(std::abs(ellab::phi_stripped(lat, x, small) - 1.0 / small -
                   lat.zeta(x)) < 1e-3);
}

TEST_CASE("kernel pole errors") {
    const Lattice& lat = square_lattice();
    const cplx lambda(0.37, 0.21);
    CHECK_THROWS_AS(ellab::phi(lat, cplx(0.0), lambda), ellab::pole_error);
    CHECK_THROWS_AS(ellab::phi(lat, cplx(0.2, 0.1), cplx(1.0, 1.0)),
                    ellab::pole_error);
    CHECK_THROWS_AS(ellab::phi(lat, -lambda, lambda), ellab::pole_error);
}

TEST_CASE("identity suite passes on both lattices") {
    for (const Lattice& lat : {square_lattice(), generic_lattice()}) {
        const auto results = ellab::identity_suite(lat, 50, 123);
        CHECK(results.size() == 24);
        for (const auto& r : results) {
            INFO(r.name);
            CHECK(r.max_rel_residual < 1e-10);
        }
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ellab/matrix.hpp"
#include "ellab/poly.hpp"
#include "ellab/random.hpp"

using namespace ellab;

namespace {

CMatrix random_matrix(Rng& rng, int n) {
    CMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) = cplx(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
    return m;
}

// Cofactor expansion along the first row, as an independent oracle for
// the LU determinant.
cplx cofactor_det(const CMatrix& m) {
    const int n = m.n();
    if (n == 1) return m(0, 0);
    cplx acc = 0;
    for (int col = 0; col < n; ++col) {
        CMatrix minor(n - 1);
        for (int i = 1; i < n; ++i) {
            int jj = 0;
            for (int j = 0; j < n; ++j) {
                if (j == col) continue;
                minor(i - 1, jj++) = m(i, j);
            }
        }
        const double sign = (col % 2 == 0) ? 1.0 : -1.0;
        acc += sign * m(0, col) * cofactor_det(minor);
    }
    return acc;
}

} // namespace

TEST_CASE("arithmetic and accessors") {
    CMatrix a(2);
    a(0, 0) = cplx(1, 2);
    a(0, 1) = cplx(0, -1);
    a(1, 0) = cplx(3, 0);
    a(1, 1) = cplx(-2, 1);
    const CMatrix id = CMatrix::identity(2);
    CHECK((a * id).max_abs() == doctest::Approx(a.max_abs()));
    CHECK(std::abs(a.trace() - cplx(-1, 3)) < 1e-15);

    const CMatrix d = CMatrix::diagonal({cplx(2, 0), cplx(0, 3)});
    CHECK(std::abs(d(0, 0) - cplx(2, 0)) < 1e-15);
    CHECK(std::abs(d(1, 0)) == 0.0);

    const std::vector<cplx> v = {cplx(1, 0), cplx(0, 1)};
    const std::vector<cplx> av = a * v;
    CHECK(std::abs(av[0] - (cplx(1, 2) + cplx(0, -1) * cplx(0, 1))) < 1e-15);

    CHECK_THROWS_AS(CMatrix(0), config_error);
}

TEST_CASE("commutator is antisymmetric and traceless") {
    Rng rng(11);
    const CMatrix a = random_matrix(rng, 4);
    const CMatrix b = random_matrix(rng, 4);
    const CMatrix ab = commutator(a, b);
    const CMatrix ba = commutator(b, a);
    CHECK((ab + ba).max_abs() < 1e-14);
    CHECK(std::abs(ab.trace()) < 1e-14);
}

TEST_CASE("determinant basics") {
    CHECK(std::abs(determinant(CMatrix::identity(3)) - cplx(1, 0)) < 1e-15);
    const CMatrix d = CMatrix::diagonal({cplx(2, 0), cplx(0, 3)});
    CHECK(std::abs(determinant(d) - cplx(0, 6)) < 1e-14);

    CMatrix sing(2);
    sing(0, 0) = cplx(1, 0);
    sing(0, 1) = cplx(2, 0);
    sing(1, 0) = cplx(2, 0);
    sing(1, 1) = cplx(4, 0);
    CHECK(std::abs(determinant(sing)) < 1e-14);
}

TEST_CASE("determinant matches cofactor expansion") {
    Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const CMatrix m = random_matrix(rng, 4);
        const cplx lu = determinant(m);
        const cplx co = cofactor_det(m);
        CHECK(std::abs(lu - co) <= 1e-12 * std::abs(co));
    }
}

TEST_CASE("determinant is multiplicative") {
    Rng rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        const CMatrix a = random_matrix(rng, 5);
        const CMatrix b = random_matrix(rng, 5);
        const cplx lhs = determinant(a * b);
        const cplx rhs = determinant(a) * determinant(b);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
}

TEST_CASE("solve and inverse") {
    Rng rng(17);
    const CMatrix a = random_matrix(rng, 5);
    std::vector<cplx> b(5);
    for (auto& w : b) w = cplx(rng.uniform(), rng.uniform());
    const std::vector<cplx> x = solve(a, b);
    const std::vector<cplx> ax = a * x;
    for (int i = 0; i < 5; ++i) CHECK(std::abs(ax[i] - b[i]) < 1e-12);

    const CMatrix ainv = inverse(a);
    CHECK((a * ainv - CMatrix::identity(5)).max_abs() < 1e-12);

    CMatrix sing(2);
    sing(0, 0) = cplx(1, 0);
    sing(0, 1) = cplx(1, 0);
    sing(1, 0) = cplx(1, 0);
    sing(1, 1) = cplx(1, 0);
    CHECK_THROWS_AS(solve(sing, {cplx(1, 0), cplx(0, 0)}), conditioning_error);
}

TEST_CASE("null vector of a rank-deficient matrix") {
    Rng rng(19);
    CMatrix a = random_matrix(rng, 3);
    // force the third column to be the sum of the first two, so
    // (1, 1, -1) spans the kernel
    for (int i = 0; i < 3; ++i) a(i, 2) = a(i, 0) + a(i, 1);
    const std::vector<cplx> nv = null_vector(a);
    double norm = 0;
    for (const cplx w : nv) norm += std::norm(w);
    CHECK(std::sqrt(norm) == doctest::Approx(1.0));
    const std::vector<cplx> anv = a * nv;
    for (const cplx w : anv) CHECK(std::abs(w) < 1e-10);
    // direction matches (1, 1, -1) up to overall phase
    const cplx phase = nv[0] * std::sqrt(3.0);
    CHECK(std::abs(nv[1] * std::sqrt(3.0) - phase) < 1e-8);
    CHECK(std::abs(nv[2] * std::sqrt(3.0) + phase) < 1e-8);
}

TEST_CASE("polynomial evaluation and trimming") {
    const PolyInZ p = make_poly({cplx(-2, 0), cplx(0, 0), cplx(1, 0)});
    CHECK(p.degree() == 2);
    CHECK(std::abs(p.eval(cplx(3, 0)) - cplx(7, 0)) < 1e-14);

    const PolyInZ trimmed = make_poly({cplx(1, 0), cplx(1e-15, 0)});
    CHECK(trimmed.degree() == 0);
}

TEST_CASE("circle nodes") {
    const std::vector<cplx> nodes = circle_nodes(4, 2.0);
    CHECK(nodes.size() == 4);
    for (const cplx z : nodes) CHECK(std::abs(z) == doctest::Approx(2.0));
    CHECK(std::abs(nodes[0] - nodes[2]) == doctest::Approx(4.0));
}

TEST_CASE("characteristic polynomial in z") {
    SUBCASE("constant builder gives a degree-0 polynomial") {
        Rng rng(23);
        const CMatrix m = random_matrix(rng, 3);
        const PolyInZ p = charpoly_in_z([&m](cplx) { return m; }, 0,
                                        circle_nodes(1, 1.0));
        CHECK(p.degree() == 0);
        CHECK(std::abs(p.c[0] - determinant(m)) < 1e-10 * std::abs(determinant(m)));
    }
    SUBCASE("known 2x2 determinant") {
        const auto builder = [](cplx z) {
            CMatrix m(2);
            m(0, 0) = z;
            m(0, 1) = cplx(1, 0);
            m(1, 0) = cplx(2, 0);
            m(1, 1) = z;
            return m;
        };
        const PolyInZ p = charpoly_in_z(builder, 2, circle_nodes(3, 1.5));
        REQUIRE(p.degree() == 2);
        CHECK(std::abs(p.c[0] + cplx(2, 0)) < 1e-12);
        CHECK(std::abs(p.c[1]) < 1e-12);
        CHECK(std::abs(p.c[2] - cplx(1, 0)) < 1e-12);
    }
    SUBCASE("fresh-node consistency") {
        Rng rng(29);
        const CMatrix r = random_matrix(rng, 4);
        const auto builder = [&r](cplx z) {
            CMatrix m = z * CMatrix::identity(4);
            m -= r;
            return m;
        };
        const PolyInZ p = charpoly_in_z(builder, 4, circle_nodes(5, 1.5));
        const cplx fresh(0.3, 0.7);
        const cplx direct = determinant(builder(fresh));
        CHECK(std::abs(p.eval(fresh) - direct) <= 1e-9 * std::abs(direct));
    }
    SUBCASE("degenerate nodes are rejected") {
        const auto builder = [](cplx z) {
            CMatrix m(1);
            m(0, 0) = z;
            return m;
        };
        const std::vector<cplx> nodes = {cplx(1, 0), cplx(1, 0)};
        CHECK_THROWS_AS(charpoly_in_z(builder, 1, nodes), conditioning_error);
    }
}

TEST_CASE("polynomial roots") {
    // (z - 1)(z - 2)(z - 3) = z^3 - 6 z^2 + 11 z - 6
    const PolyInZ p = make_poly(
        {cplx(-6, 0), cplx(11, 0), cplx(-6, 0), cplx(1, 0)});
    std::vector<cplx> roots = poly_roots(p);
    REQUIRE(roots.size() == 3);
    std::sort(roots.begin(), roots.end(),
              [](cplx a, cplx b) { return a.real() < b.real(); });
    CHECK(std::abs(roots[0] - cplx(1, 0)) < 1e-9);
    CHECK(std::abs(roots[1] - cplx(2, 0)) < 1e-9);
    CHECK(std::abs(roots[2] - cplx(3, 0)) < 1e-9);
}

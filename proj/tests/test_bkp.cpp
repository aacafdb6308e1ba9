#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "ellab/bkp.hpp"
#include "ellab/dynamics.hpp"
#include "ellab/matrix.hpp"
#include "ellab/poly.hpp"
#include "ellab/random.hpp"

using namespace ellab;

namespace {

const Lattice lat(cplx(0.5, 0.0), cplx(0.3, 0.4));

ManyBodyState reference_state() {
    ManyBodyState s;
    s.x = {cplx(0.21, 0.05), cplx(-0.11, 0.17), cplx(0.05, -0.23)};
    s.v = {cplx(0.4, -0.1), cplx(-0.2, 0.3), cplx(0.1, 0.12)};
    return s;
}

const cplx lambda1(0.37, 0.21);
const cplx z_probe(0.31, -0.27);

ManyBodyState draw_state(Rng& rng, int n, double margin) {
    ManyBodyState s;
    while (static_cast<int>(s.x.size()) < n) {
        const cplx cand = rng.cell_point(lat);
        bool ok = lat.pole_distance(cand) > margin;
        for (const cplx xi : s.x)
            ok = ok && lat.pole_distance(cand - xi) > margin;
        if (ok) s.x.push_back(cand);
    }
    for (int i = 0; i < n; ++i) s.v.push_back(rng.unit_disk());
    return s;
}

double matrix_scale(const BKPLax& lx) {
    return std::max(1.0, std::max(lx.l.max_abs(), lx.m.max_abs()));
}

} // namespace

TEST_CASE("manakov representation") {
    const ManyBodyState s = reference_state();
    CHECK(manakov_residual(s, lat, z_probe, lambda1).max_abs() <= 1e-9);

    Rng rng(515);
    for (const int n : {2, 4}) {
        const ManyBodyState st = draw_state(rng, n, 0.1);
        const double scale = matrix_scale(build_lax_bkp(st, lat, z_probe, lambda1));
        CHECK(manakov_residual(st, lat, z_probe, lambda1).max_abs() <=
              1e-11 * scale);
    }
}

TEST_CASE("acceleration-free form holds for an arbitrary slot") {
    const ManyBodyState s = reference_state();
    Rng rng(99);
    std::vector<cplx> slot;
    for (int i = 0; i < 3; ++i) slot.push_back(10.0 * rng.unit_disk());
    const double scale = matrix_scale(build_lax_bkp(s, lat, z_probe, lambda1));
    CHECK(manakov_identity_residual(s, lat, z_probe, lambda1, slot).max_abs() <=
          1e-11 * scale);
}

TEST_CASE("the two acceleration expressions agree") {
    const ManyBodyState s = reference_state();
    const std::vector<cplx> a = accel_bkp(s, lat);
    const std::vector<cplx> b = accel_bkp_raw(s, lat);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i] - b[i]) <= 1e-11 * std::max(1.0, std::abs(a[i])));
}

TEST_CASE("involution of the lax matrix") {
    const ManyBodyState s = reference_state();
    const BKPLax plus = build_lax_bkp(s, lat, z_probe, lambda1);
    const BKPLax minus = build_lax_bkp(s, lat, -z_probe, -lambda1);
    const double scale = matrix_scale(plus);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(minus.l(i, j) - plus.l(j, i)) <= 1e-12 * scale);
}

TEST_CASE("integrals") {
    const ManyBodyState s = reference_state();
    const BKPIntegrals ints = integrals_bkp(s, lat);

    SUBCASE("total momentum is the first integral") {
        CHECK(std::abs(ints.i1 - (s.v[0] + s.v[1] + s.v[2])) <= 1e-13);
    }

    SUBCASE("the cubic integral appears only for three particles") {
        REQUIRE(ints.i3.has_value());
        ManyBodyState s2;
        s2.x = {s.x[0], s.x[1]};
        s2.v = {s.v[0], s.v[1]};
        CHECK_FALSE(integrals_bkp(s2, lat).i3.has_value());
    }

    SUBCASE("the curve value at large z recovers the determinant integral") {
        const cplx lam_small(1e-3, 0.0);
        const cplx limit = curve_value_bkp(s, lat, 1.0 / lam_small, lam_small);
        CHECK(std::abs(limit - ints.j) <= 1e-4 * std::abs(ints.j));
    }
}

TEST_CASE("curve coefficients have definite parity in lambda") {
    const ManyBodyState s = reference_state();
    const PolyInZ plus = spectral_curve_bkp(s, lat, lambda1);
    const PolyInZ minus = spectral_curve_bkp(s, lat, -lambda1);
    REQUIRE(plus.degree() == 6);
    REQUIRE(minus.degree() == 6);
    for (int k = 0; k <= 6; ++k) {
        const cplx want = (k % 2 == 0) ? plus.c[k] : -plus.c[k];
        CHECK(std::abs(minus.c[k] - want) <=
              1e-10 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("rational degeneration") {
    const Lattice big(cplx(400.0, 0.0), cplx(0.0, 400.0));
    const ManyBodyState s = reference_state();

    SUBCASE("three-body accelerations approach the rational form") {
        const std::vector<cplx> ell = accel_bkp(s, big);
        const std::vector<cplx> rat = rational_accel_bkp(s.x, s.v);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(ell[i] - rat[i]) <=
                  1e-5 * std::max(1.0, std::abs(rat[i])));
    }

    SUBCASE("a single particle is free") {
        CHECK(std::abs(rational_accel_bkp({s.x[0]}, {s.v[0]})[0]) == 0.0);
        ManyBodyState one;
        one.x = {s.x[0]};
        one.v = {s.v[0]};
        CHECK(std::abs(accel_bkp(one, lat)[0]) <= 1e-12);
    }

    SUBCASE("relabeling particles relabels the accelerations") {
        const std::vector<cplx> rat = rational_accel_bkp(s.x, s.v);
        const std::vector<cplx> per = rational_accel_bkp(
            {s.x[2], s.x[0], s.x[1]}, {s.v[2], s.v[0], s.v[1]});
        CHECK(std::abs(per[1] - rat[0]) <= 1e-12 * std::abs(rat[0]));
        CHECK(std::abs(per[0] - rat[2]) <= 1e-12 * std::abs(rat[2]));
    }
}

TEST_CASE("self-dual flow") {
    const cplx mu(0.04, -0.06);

    SUBCASE("single pair closed form") {
        const std::vector<cplx> x = {cplx(0.21, 0.05)};
        const std::vector<cplx> y = {cplx(-0.14, -0.22)};
        std::vector<cplx> dx, dy;
        selfdual_rhs_bkp(lat, x, y, mu, dx, dy);
        const cplx d = x[0] - y[0];
        const cplx zt = lat.zeta(d);
        const cplx want = 3.0 * lat.wp(d) - 3.0 * zt * zt - 6.0 * mu * zt -
                          3.0 * mu * mu;
        CHECK(std::abs(dx[0] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }

    SUBCASE("swapping the families swaps the flow at reversed mu") {
        Rng rng(31);
        std::vector<cplx> pts;
        while (pts.size() < 4) {
            const cplx cand = rng.cell_point(lat);
            bool ok = lat.pole_distance(cand) > 0.15;
            for (const cplx q : pts)
                ok = ok && lat.pole_distance(cand - q) > 0.15;
            if (ok) pts.push_back(cand);
        }
        const std::vector<cplx> x = {pts[0], pts[1]};
        const std::vector<cplx> y = {pts[2], pts[3]};
        std::vector<cplx> dx, dy, du, dv;
        selfdual_rhs_bkp(lat, x, y, mu, dx, dy);
        selfdual_rhs_bkp(lat, y, x, -mu, du, dv);
        for (int i = 0; i < 2; ++i) {
            CHECK(std::abs(du[i] - dy[i]) <= 1e-12 * std::max(1.0, std::abs(dy[i])));
            CHECK(std::abs(dv[i] - dx[i]) <= 1e-12 * std::max(1.0, std::abs(dx[i])));
        }
    }

    SUBCASE("the induced second derivative is the flow acceleration") {
        Rng rng(7);
        std::vector<cplx> pts;
        while (pts.size() < 6) {
            const cplx cand = rng.cell_point(lat);
            bool ok = lat.pole_distance(cand) > 0.2;
            for (const cplx q : pts)
                ok = ok && lat.pole_distance(cand - q) > 0.2;
            if (ok) pts.push_back(cand);
        }
        std::vector<cplx> y0(pts.begin(), pts.end());

        const Rhs rhs = [&](double, const std::vector<cplx>& y) {
            const std::vector<cplx> xf(y.begin(), y.begin() + 3);
            const std::vector<cplx> yf(y.begin() + 3, y.end());
            std::vector<cplx> dx, dy;
            selfdual_rhs_bkp(lat, xf, yf, mu, dx, dy);
            dx.insert(dx.end(), dy.begin(), dy.end());
            return dx;
        };

        const double h = 5e-5;
        IntegrateOptions popt;
        popt.rel_tol = 1e-12;
        popt.abs_tol = 1e-14;
        std::vector<std::vector<cplx>> chain = {y0};
        for (int k = 1; k <= 4; ++k)
            chain.push_back(
                integrate(rhs, y0, 0.0, k * h / 2.0, popt).y.back());

        ManyBodyState mid;
        mid.x.assign(chain[2].begin(), chain[2].begin() + 3);
        mid.v = rhs(0.0, chain[2]);
        mid.v.resize(3);
        const std::vector<cplx> expected = accel_bkp(mid, lat);

        for (int i = 0; i < 3; ++i) {
            const cplx d2_h =
                (chain[4][i] - 2.0 * chain[2][i] + chain[0][i]) / (h * h);
            const cplx d2_half = (chain[3][i] - 2.0 * chain[2][i] + chain[1][i]) /
                                 (h * h / 4.0);
            const cplx fd = (4.0 * d2_half - d2_h) / 3.0;
            CHECK(std::abs(fd - expected[i]) <=
                  1e-5 * std::max(1.0, std::abs(expected[i])));
        }
    }
}

TEST_CASE("derivative-coupled variant") {
    const ManyBodyState s = reference_state();
    const NVParams p{lat, cplx(0.11, 0.07), lambda1};
    const cplx z_nv(0.41, -0.19);

    SUBCASE("manakov relation with the solved accelerations") {
        const NVSystem sys = nv_system(s, p, z_nv, lambda1);
        const double scale =
            std::max(1.0, std::max(sys.l.max_abs(), sys.m.max_abs()));
        CHECK(nv_manakov_residual(s, p, z_nv, lambda1).max_abs() <=
              1e-9 * scale);
    }

    SUBCASE("a single particle does not accelerate") {
        ManyBodyState one;
        one.x = {s.x[0]};
        one.v = {s.v[0]};
        const std::vector<cplx> a = nv_accel(one, p);
        REQUIRE(a.size() == 1);
        CHECK(std::abs(a[0]) == 0.0);
    }

    SUBCASE("rational degeneration") {
        // The acceleration system maps the velocity vector to gamma times
        // itself, so it is exactly singular at gamma = 0 and the flat
        // closed form is reached through a small regularising gamma.  The
        // approach is linear in gamma.
        const Lattice big(cplx(400.0, 0.0), cplx(0.0, 400.0));
        const NVParams flat{big, cplx(1e-6, 0.0), lambda1};
        const std::vector<cplx> ell = nv_accel(s, flat);
        const std::vector<cplx> rat = rational_accel_nv(s.x, s.v);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(ell[i] - rat[i]) <=
                  1e-5 * std::max(1.0, std::abs(rat[i])));

        const NVParams degenerate{big, cplx(0, 0), lambda1};
        CHECK_THROWS_AS(nv_accel(s, degenerate), conditioning_error);

        cplx direct = 0;
        for (int j = 1; j < 3; ++j)
            direct += 2.0 * s.v[0] * s.v[j] / (s.x[0] - s.x[j]);
        CHECK(std::abs(rat[0] - direct) <= 1e-12 * std::abs(direct));
    }

    SUBCASE("preconditions") {
        CHECK_THROWS_AS(nv_system(s, p, cplx(0, 0), lambda1), config_error);
        ManyBodyState stuck = s;
        stuck.v[1] = 0;
        CHECK_THROWS_AS(nv_accel(stuck, p), config_error);
    }
}

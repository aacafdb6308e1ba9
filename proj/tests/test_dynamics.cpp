#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ellab/cm.hpp"
#include "ellab/dynamics.hpp"

using namespace ellab;

namespace {

const Rhs rotation = [](double, const std::vector<cplx>& y) {
    return std::vector<cplx>{cplx(0, 1) * y[0]};
};

double rotation_endpoint_error(const IntegrateOptions& opt) {
    const Trajectory tr = integrate(rotation, {cplx(1, 0)}, 0.0, 1.0, opt);
    return std::abs(tr.y.back()[0] - std::exp(cplx(0, 1)));
}

// Second-order pairwise flow packed as [x..., v...].
Rhs cm_rhs(const CMParams& p, int n, double sign = 1.0) {
    return [p, n, sign](double t, const std::vector<cplx>& y) {
        ManyBodyState s;
        s.t = t;
        s.x.assign(y.begin(), y.begin() + n);
        s.v.assign(y.begin() + n, y.end());
        const std::vector<cplx> a = accel_t2(s, p);
        std::vector<cplx> dy(y.begin() + n, y.end());
        for (const cplx w : a) dy.push_back(sign * w);
        return dy;
    };
}

const Lattice test_lat(cplx(0.5, 0.0), cplx(0.3, 0.4));

ManyBodyState two_body_state() {
    ManyBodyState s;
    s.x = {cplx(0.21, 0.05), cplx(-0.11, 0.17)};
    s.v = {cplx(0.4, -0.1), cplx(-0.2, 0.3)};
    return s;
}

std::vector<cplx> packed(const ManyBodyState& s) {
    std::vector<cplx> y(s.x);
    y.insert(y.end(), s.v.begin(), s.v.end());
    return y;
}

} // namespace

TEST_CASE("zero rhs keeps the state constant") {
    const Rhs zero = [](double, const std::vector<cplx>& y) {
        return std::vector<cplx>(y.size(), cplx(0, 0));
    };
    const std::vector<cplx> y0 = {cplx(1, 2), cplx(-3, 4)};
    const Trajectory tr = integrate(zero, y0, 0.0, 2.0, {});
    for (const auto& row : tr.y) {
        CHECK(std::abs(row[0] - y0[0]) == 0.0);
        CHECK(std::abs(row[1] - y0[1]) == 0.0);
    }
    for (size_t i = 1; i < tr.t.size(); ++i) CHECK(tr.t[i] > tr.t[i - 1]);
}

TEST_CASE("scalar rotation hits the closed form") {
    CHECK(rotation_endpoint_error({}) <= 1e-9);
}

TEST_CASE("fifth-order convergence under step halving") {
    IntegrateOptions coarse;
    coarse.h_fixed = 0.1;
    IntegrateOptions fine;
    fine.h_fixed = 0.05;
    const double e1 = rotation_endpoint_error(coarse);
    const double e2 = rotation_endpoint_error(fine);
    CHECK(e1 / e2 >= 16.0);
}

TEST_CASE("tightening tolerances tightens the endpoint") {
    IntegrateOptions loose;
    loose.rel_tol = 1e-6;
    loose.abs_tol = 1e-8;
    IntegrateOptions tight;
    tight.rel_tol = 1e-8;
    tight.abs_tol = 1e-10;
    const double e1 = rotation_endpoint_error(loose);
    const double e2 = rotation_endpoint_error(tight);
    CHECK(e1 / e2 >= 4.0);
}

TEST_CASE("precondition failures") {
    CHECK_THROWS_AS(integrate(rotation, {cplx(1, 0)}, 1.0, 0.5, {}),
                    config_error);
    IntegrateOptions bad;
    bad.rel_tol = 0;
    CHECK_THROWS_AS(integrate(rotation, {cplx(1, 0)}, 0.0, 1.0, bad),
                    config_error);
}

TEST_CASE("step underflow on a non-finite rhs") {
    const Rhs broken = [](double, const std::vector<cplx>& y) {
        return std::vector<cplx>(
            y.size(), cplx(std::numeric_limits<double>::quiet_NaN(), 0));
    };
    CHECK_THROWS_AS(integrate(broken, {cplx(1, 0)}, 0.0, 1.0, {}),
                    convergence_error);
}

TEST_CASE("two-body centre of mass moves linearly") {
    const CMParams p{test_lat, cplx(0.7, 0.0), cplx(0, 0), cplx(0, 0),
                     cplx(0.37, 0.21)};
    const ManyBodyState s0 = two_body_state();
    const Trajectory tr = integrate(cm_rhs(p, 2), packed(s0), 0.0, 0.5, {});
    const cplx x_sum0 = s0.x[0] + s0.x[1];
    const cplx v_sum0 = s0.v[0] + s0.v[1];
    for (size_t i = 0; i < tr.t.size(); ++i) {
        const cplx x_sum = tr.y[i][0] + tr.y[i][1];
        CHECK(std::abs(x_sum - x_sum0 - tr.t[i] * v_sum0) <= 1e-9);
    }
}

TEST_CASE("monitor") {
    const CMParams p{test_lat, cplx(0.7, 0.0), cplx(0, 0), cplx(0, 0),
                     cplx(0.37, 0.21)};
    const auto h2_of = [p](double t, const std::vector<cplx>& y) {
        ManyBodyState s;
        s.t = t;
        s.x.assign(y.begin(), y.begin() + 2);
        s.v.assign(y.begin() + 2, y.end());
        return hamiltonians(s, p, p.lambda_default).h2;
    };

    SUBCASE("constant trajectory has zero drift") {
        const Rhs zero = [](double, const std::vector<cplx>& y) {
            return std::vector<cplx>(y.size(), cplx(0, 0));
        };
        const Trajectory tr =
            integrate(zero, packed(two_body_state()), 0.0, 1.0, {});
        const DriftReport rep = monitor(tr, {{"h2", h2_of}});
        REQUIRE(rep.rows.size() == 1);
        CHECK(rep.rows[0].max_abs_drift == 0.0);
    }

    SUBCASE("energy is conserved along the true flow") {
        const Trajectory tr =
            integrate(cm_rhs(p, 2), packed(two_body_state()), 0.0, 0.5, {});
        const DriftReport rep = monitor(tr, {{"h2", h2_of}});
        CHECK(rep.rows[0].max_abs_drift <= 1e-8);
    }

    SUBCASE("sign-flipped coupling destroys conservation") {
        const Trajectory tr = integrate(cm_rhs(p, 2, -1.0),
                                        packed(two_body_state()), 0.0, 0.5, {});
        const DriftReport rep = monitor(tr, {{"h2", h2_of}});
        CHECK(rep.rows[0].max_abs_drift >= 1e-3);
    }
}

TEST_CASE("collision guard aborts before the state degenerates") {
    const CMParams p{test_lat, cplx(1.0, 0.0), cplx(0, 0), cplx(0, 0),
                     cplx(0.37, 0.21)};
    // head-on pair
    ManyBodyState s0;
    s0.x = {cplx(-0.2, 0.0), cplx(0.2, 0.0)};
    s0.v = {cplx(1.0, 0.0), cplx(-1.0, 0.0)};

    IntegrateOptions opt;
    opt.guard = [](double, const std::vector<cplx>& y) {
        if (test_lat.pole_distance(y[0] - y[1]) < 0.1)
            throw collision_error("guard: pair too close");
    };
    try {
        integrate(cm_rhs(p, 2), packed(s0), 0.0, 1.0, opt);
        FAIL("expected the guard to fire");
    } catch (const collision_error&) {
    }
}

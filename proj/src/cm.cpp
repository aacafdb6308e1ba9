#include "ellab/cm.hpp"

#include <cmath>

#include "ellab/kernel.hpp"

namespace ellab {

namespace {

void require_state(const ManyBodyState& s, const Lattice& lat) {
    if (s.x.empty() || s.x.size() != s.v.size())
        throw config_error("state needs equally many positions and velocities");
    check_distinct(lat, s.x);
}

void require_unit_hbar(const CMParams& p, const char* what) {
    if (p.hbar != cplx(1.0))
        throw config_error(std::string(what) + " is implemented for hbar = 1 only");
}

CMatrix velocity_commuted_phi(const Lattice& lat, const ManyBodyState& s,
                              cplx lambda, const std::vector<cplx>& vel) {
    // Off-diagonal matrix (vel_i - vel_j) * phi'(x_ij), the time
    // derivative of the kernel matrix along a flow with those
    // velocities.
    const int n = static_cast<int>(s.x.size());
    CMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            m(i, j) = (vel[static_cast<size_t>(i)] - vel[static_cast<size_t>(j)]) *
                      phi(lat, s.x[static_cast<size_t>(i)] - s.x[static_cast<size_t>(j)],
                          lambda, 1);
        }
    return m;
}

} // namespace

LaxPair build_lax_t2(const ManyBodyState& s, const CMParams& p, cplx z,
                     cplx lambda) {
    (void)z;
    require_state(s, p.lat);
    if (p.hbar == cplx(0.0)) throw config_error("hbar must be nonzero");
    const int n = static_cast<int>(s.x.size());
    std::vector<cplx> neg_v(s.v);
    for (auto& w : neg_v) w = -w;

    CMatrix l = CMatrix::diagonal(neg_v);
    l -= 2.0 * p.hbar * phi_matrix(p.lat, s.x, lambda, 0);

    CMatrix m = (p.hbar * p.lat.wp(lambda) + 4.0 * p.c_quad / p.hbar) *
                CMatrix::identity(n);
    m -= 2.0 * p.hbar * phi_matrix(p.lat, s.x, lambda, 1);
    m -= 2.0 * p.hbar * wp_diag(p.lat, s.x, 0);
    return {std::move(l), std::move(m)};
}

std::vector<cplx> accel_t2(const ManyBodyState& s, const CMParams& p) {
    require_state(s, p.lat);
    const size_t n = s.x.size();
    std::vector<cplx> acc(n);
    const cplx coef = 4.0 * p.hbar * p.hbar;
    for (size_t i = 0; i < n; ++i) {
        cplx sum = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sum += p.lat.wp(s.x[i] - s.x[j], 1);
        }
        acc[i] = coef * sum;
    }
    return acc;
}

CMatrix lax_identity_residual(const ManyBodyState& s, const CMParams& p, cplx z,
                              cplx lambda) {
    const LaxPair lm = build_lax_t2(s, p, z, lambda);
    const std::vector<cplx> acc = accel_t2(s, p);
    std::vector<cplx> neg_acc(acc);
    for (auto& w : neg_acc) w = -w;
    CMatrix ldot = CMatrix::diagonal(neg_acc);
    ldot -= 2.0 * p.hbar * velocity_commuted_phi(p.lat, s, lambda, s.v);
    return ldot - commutator(lm.m, lm.l);
}

CMHamiltonians hamiltonians(const ManyBodyState& s, const CMParams& p,
                            cplx lambda) {
    require_state(s, p.lat);
    const size_t n = s.x.size();
    const cplx h2coef = p.hbar * p.hbar;
    CMHamiltonians h{};
    for (size_t i = 0; i < n; ++i) {
        const cplx pi = s.v[i] / 2.0;
        h.h1 -= pi;
        h.h2 += pi * pi;
        h.h3 -= pi * pi * pi;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const cplx wpij = p.lat.wp(s.x[i] - s.x[j]);
            if (j > i) h.h2 -= 2.0 * h2coef * wpij;
            h.h3 += 3.0 * h2coef * pi * wpij;
        }
    }
    const LaxPair lm = build_lax_t2(s, p, cplx(0.0), lambda);
    const CMatrix l2 = lm.l * lm.l;
    const double dn = static_cast<double>(n);
    const cplx wl = p.lat.wp(lambda);
    h.h2_trace = l2.trace() / 4.0 - h2coef * dn * (dn - 1.0) * wl;
    h.h3_trace = (l2 * lm.l).trace() / 8.0 -
                 1.5 * h2coef * (dn - 1.0) * wl * lm.l.trace() -
                 0.5 * p.hbar * h2coef * dn * (dn - 1.0) * (dn - 2.0) *
                     p.lat.wp(lambda, 1);
    return h;
}

T3Flow flow_t3(const ManyBodyState& s, const CMParams& p) {
    require_unit_hbar(p, "the third flow");
    require_state(s, p.lat);
    const size_t n = s.x.size();
    T3Flow f;
    f.velocity.resize(n);
    f.accel.resize(n);
    for (size_t i = 0; i < n; ++i) {
        cplx wsum = 0, asum = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            wsum += p.lat.wp(s.x[i] - s.x[j]);
            asum += (s.v[i] + s.v[j]) * p.lat.wp(s.x[i] - s.x[j], 1);
        }
        f.velocity[i] = -6.0 * p.c_quad - 0.75 * s.v[i] * s.v[i] + 3.0 * wsum;
        f.accel[i] = -3.0 * asum;
    }
    return f;
}

CMatrix build_T(const ManyBodyState& s, const CMParams& p, cplx /*z*/,
                           cplx lambda) {
    require_unit_hbar(p, "the third flow");
    const LaxPair lm = build_lax_t2(s, p, cplx(0.0), lambda);
    const int n = static_cast<int>(s.x.size());
    CMatrix t = 0.75 * (lm.m * lm.l);
    t -= 1.5 * phi_matrix(p.lat, s.x, lambda, 2);
    t += 1.5 * (CMatrix::diagonal(s.v) * phi_matrix(p.lat, s.x, lambda, 1));
    t += 1.5 * wp_diag(p.lat, s.x, 1);
    t += 1.5 * wp_diag_weighted(p.lat, s.x, s.v, 0);
    t -= 0.75 * p.lat.wp(lambda) * CMatrix::diagonal(s.v);
    t += ((p.lat.wp(lambda, 1) + 3.0 * p.b_quad) / 2.0) * CMatrix::identity(n);
    return t;
}

CMatrix t3_residual(const ManyBodyState& s, const CMParams& p, cplx lambda,
                    const std::vector<cplx>& accel_slot) {
    if (accel_slot.size() != s.x.size())
        throw config_error("t3_residual: acceleration slot size mismatch");
    const T3Flow f = flow_t3(s, p);
    std::vector<cplx> neg_slot(accel_slot);
    for (auto& w : neg_slot) w = -w;
    CMatrix lt3 = CMatrix::diagonal(neg_slot);
    lt3 -= 2.0 * velocity_commuted_phi(p.lat, s, lambda, f.velocity);
    const LaxPair lm = build_lax_t2(s, p, cplx(0.0), lambda);
    return lt3 + commutator(lm.l, build_T(s, p, cplx{0.0, 0.0}, lambda));
}

PolyInZ spectral_curve(const ManyBodyState& s, const CMParams& p, cplx lambda) {
    require_state(s, p.lat);
    const int n = static_cast<int>(s.x.size());
    std::vector<cplx> neg_v(s.v);
    for (auto& w : neg_v) w = -w;
    CMatrix base = CMatrix::diagonal(neg_v);
    base -= 2.0 * p.hbar * phi_matrix(p.lat, s.x, lambda, 0, true);
    const auto builder = [&](cplx z) {
        CMatrix m = (2.0 * z) * CMatrix::identity(n);
        m -= base;
        return m;
    };
    return charpoly_in_z(builder, n, circle_nodes(n + 1, 1.5));
}

void selfdual_rhs(const Lattice& lat, const std::vector<cplx>& x,
                  const std::vector<cplx>& y, cplx mu, std::vector<cplx>& dx,
                  std::vector<cplx>& dy) {
    if (x.size() != y.size() || x.empty())
        throw config_error("selfdual_rhs: families must have equal size");
    check_distinct(lat, x);
    check_distinct(lat, y);
    const double tol = collision_margin * lat.cell_scale();
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t j = 0; j < y.size(); ++j)
            if (lat.pole_distance(x[i] - y[j]) < tol)
                throw collision_error("self-dual families collided");
    const size_t n = x.size();
    dx.assign(n, cplx(0.0));
    dy.assign(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i) {
        cplx sx = 0, sy = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j != i) {
                sx += 2.0 * lat.zeta(x[i] - x[j]);
                sy -= 2.0 * lat.zeta(y[i] - y[j]);
            }
            sx -= 2.0 * lat.zeta(x[i] - y[j]);
            sy += 2.0 * lat.zeta(y[i] - x[j]);
        }
        dx[i] = sx + mu;
        dy[i] = sy + mu;
    }
}

std::vector<cplx> discrete_cm_residual(const Lattice& lat,
                                       const std::vector<cplx>& x_prev,
                                       const std::vector<cplx>& x_cur,
                                       const std::vector<cplx>& x_next) {
    const size_t n = x_cur.size();
    if (x_prev.size() != n || x_next.size() != n || n == 0)
        throw config_error("discrete residual: slice sizes mismatch");
    std::vector<cplx> f(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            f[i] += lat.zeta(x_cur[i] - x_next[j]);
            f[i] += lat.zeta(x_cur[i] - x_prev[j]);
            if (j != i) f[i] -= 2.0 * lat.zeta(x_cur[i] - x_cur[j]);
        }
    }
    return f;
}

std::vector<cplx> discrete_cm_step(const Lattice& lat,
                                   const std::vector<cplx>& x_prev,
                                   const std::vector<cplx>& x_cur,
                                   const std::vector<cplx>& guess) {
    const size_t n = x_cur.size();
    if (x_prev.size() != n || guess.size() != n || n == 0)
        throw config_error("discrete_cm_step: slice sizes mismatch");
    std::vector<cplx> u(guess);
    for (int it = 0; it < 50; ++it) {
        const std::vector<cplx> f = discrete_cm_residual(lat, x_prev, x_cur, u);
        double fn = 0;
        for (const auto& z : f) fn = std::max(fn, std::abs(z));
        if (fn <= 1e-10) return u;
        CMatrix jac(static_cast<int>(n));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                jac(static_cast<int>(i), static_cast<int>(j)) =
                    lat.wp(x_cur[i] - u[j]);
        const std::vector<cplx> delta = solve(std::move(jac), f);
        for (size_t i = 0; i < n; ++i) u[i] -= delta[i];
    }
    throw convergence_error("discrete_cm_step: Newton iteration did not "
                            "converge");
}

cplx wave_residual_t2(const ManyBodyState& s, const CMParams& p, cplx z,
                      cplx lambda, cplx x_eval) {
    require_unit_hbar(p, "the wave residual");
    require_state(s, p.lat);
    const size_t n = s.x.size();

    // z must lie on the spectral curve; test against the gauge-stripped
    // determinant with a Hadamard-type scale.
    std::vector<cplx> neg_v(s.v);
    for (auto& w : neg_v) w = -w;
    CMatrix stripped = CMatrix::diagonal(neg_v);
    stripped -= 2.0 * phi_matrix(p.lat, s.x, lambda, 0, true);
    CMatrix zmat = (2.0 * z) * CMatrix::identity(static_cast<int>(n));
    zmat -= stripped;
    double bound = 1.0;
    for (int i = 0; i < zmat.n(); ++i) {
        double row = 0;
        for (int j = 0; j < zmat.n(); ++j) row += std::abs(zmat(i, j));
        bound *= std::max(row, 1.0);
    }
    if (std::abs(determinant(zmat)) > 1e-8 * bound)
        throw config_error("wave_residual_t2: z does not lie on the spectral "
                           "curve");

    const LaxPair lm = build_lax_t2(s, p, z, lambda);
    CMatrix shifted = lm.l;
    shifted -= (2.0 * z) * CMatrix::identity(static_cast<int>(n));
    std::vector<cplx> c = null_vector(shifted);
    if (std::abs(c[0]) < 1e-10)
        throw convergence_error("wave_residual_t2: null vector has vanishing "
                                "leading component");
    const cplx c0 = c[0];
    for (auto& ci : c) ci /= c0;
    const std::vector<cplx> cdot = lm.m * c;

    cplx r = 0, psi = 0, wpsum = 0;
    for (size_t i = 0; i < n; ++i) {
        const cplx d = x_eval - s.x[i];
        const cplx f0 = phi(p.lat, d, lambda, 0);
        const cplx f1 = phi(p.lat, d, lambda, 1);
        const cplx f2 = phi(p.lat, d, lambda, 2);
        psi += c[i] * f0;
        wpsum += p.lat.wp(d);
        r += -cdot[i] * f0 + c[i] * s.v[i] * f1 + 2.0 * z * c[i] * f1 +
             c[i] * f2 + 4.0 * p.c_quad * c[i] * f0;
    }
    return r - 2.0 * wpsum * psi;
}

} // namespace ellab

#include "ellab/rs.hpp"

#include <cmath>

#include "ellab/kernel.hpp"

namespace ellab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

void require_rs_state(const ManyBodyState& s, const Lattice& lat, cplx eta) {
    if (s.x.empty() || s.x.size() != s.v.size())
        throw config_error("state needs equally many positions and velocities");
    check_distinct(lat, s.x);
    const double tol = collision_margin * lat.cell_scale();
    if (lat.pole_distance(eta) < tol)
        throw config_error("shift eta lies on the period lattice");
    for (size_t i = 0; i < s.x.size(); ++i)
        for (size_t j = 0; j < s.x.size(); ++j) {
            if (j == i) continue;
            const cplx d = s.x[i] - s.x[j];
            if (lat.pole_distance(d + eta) < tol ||
                lat.pole_distance(d - eta) < tol)
                throw collision_error("separation collides with the shift "
                                      "eta");
        }
}

void require_nonzero_velocities(const ManyBodyState& s) {
    for (const auto& v : s.v)
        if (v == cplx(0.0))
            throw config_error("every velocity must be nonzero");
}

// Product side of the opposite-flow velocity relation:
// -e^{2 c eta^2} sigma^2(eta) prod_{k != i} sigma(x_ik + eta)
// sigma(x_ik - eta) / sigma^2(x_ik).
std::vector<cplx> velocity_products(const ManyBodyState& s,
                                    const RSParams& p) {
    const size_t n = s.x.size();
    const cplx se = p.lat.sigma(p.eta);
    const cplx pref =
        -std::exp(2.0 * p.c_quad * p.eta * p.eta) * se * se;
    std::vector<cplx> out(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i) {
        cplx prod = pref;
        for (size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            const cplx d = s.x[i] - s.x[k];
            const cplx sd = p.lat.sigma(d);
            prod *= p.lat.sigma(d + p.eta) * p.lat.sigma(d - p.eta) /
                    (sd * sd);
        }
        out[i] = prod;
    }
    return out;
}

} // namespace

RSLax build_lax_rs(const ManyBodyState& s, const RSParams& p, cplx lambda) {
    require_rs_state(s, p.lat, p.eta);
    const int n = static_cast<int>(s.x.size());
    const CMatrix xdot = CMatrix::diagonal(s.v);
    const CMatrix aminus =
        phi_matrix_full(p.lat, s.x, lambda, 0, false, -p.eta);

    CMatrix l = xdot * aminus;

    // The generator carries a -zeta(eta) Xdot counterterm; without it
    // the compatibility residual picks up a commutator of L with a
    // multiple of Xdot.
    CMatrix m = (p.r_coeff * p.eta) * CMatrix::identity(n);
    m += xdot * phi_matrix(p.lat, s.x, lambda, 0);
    m -= xdot * aminus;
    m += zeta_diag_weighted(p.lat, s.x, s.v);
    m -= zeta_diag_weighted(p.lat, s.x, s.v, p.eta);
    m -= p.lat.zeta(p.eta) * xdot;
    return {std::move(l), std::move(m)};
}

std::vector<cplx> accel_rs(const ManyBodyState& s, const RSParams& p) {
    require_rs_state(s, p.lat, p.eta);
    const size_t n = s.x.size();
    const cplx we = p.lat.wp(p.eta);
    std::vector<cplx> acc(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            const cplx wik = p.lat.wp(s.x[i] - s.x[k]);
            const cplx denom = we - wik;
            const double scale =
                std::max({std::abs(we), std::abs(wik), 1.0});
            if (std::abs(denom) < 1e-10 * scale)
                throw collision_error("separation degenerate with the shift "
                                      "eta");
            acc[i] += s.v[i] * s.v[k] * p.lat.wp(s.x[i] - s.x[k], 1) / denom;
        }
    return acc;
}

std::vector<cplx> accel_rs_zeta(const ManyBodyState& s, const RSParams& p) {
    require_rs_state(s, p.lat, p.eta);
    const size_t n = s.x.size();
    std::vector<cplx> acc(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            const cplx d = s.x[i] - s.x[k];
            const cplx sik = p.lat.zeta(d + p.eta) + p.lat.zeta(d - p.eta) -
                             2.0 * p.lat.zeta(d);
            acc[i] -= s.v[i] * s.v[k] * sik;
        }
    return acc;
}

CMatrix rs_identity_residual(const ManyBodyState& s, const RSParams& p,
                             cplx lambda) {
    require_nonzero_velocities(s);
    const RSLax lax = build_lax_rs(s, p, lambda);
    const std::vector<cplx> acc = accel_rs(s, p);
    const size_t n = s.x.size();

    const CMatrix xdot = CMatrix::diagonal(s.v);
    const CMatrix aminus =
        phi_matrix_full(p.lat, s.x, lambda, 0, false, -p.eta);
    const CMatrix bminus = phi_matrix(p.lat, s.x, lambda, 1, false, -p.eta);
    CMatrix ldot = CMatrix::diagonal(acc) * aminus;
    ldot += xdot * commutator(xdot, bminus);

    std::vector<cplx> ratio(n);
    for (size_t i = 0; i < n; ++i) ratio[i] = acc[i] / s.v[i];
    CMatrix factor = CMatrix::diagonal(ratio);
    factor += zeta_diag_weighted(p.lat, s.x, s.v, p.eta);
    factor += zeta_diag_weighted(p.lat, s.x, s.v, -p.eta);
    factor -= 2.0 * zeta_diag_weighted(p.lat, s.x, s.v);

    return ldot + commutator(lax.l, lax.m) - factor * lax.l;
}

RSHamiltonians hamiltonians_rs(const ManyBodyState& s, const RSParams& p,
                               cplx lambda) {
    require_rs_state(s, p.lat, p.eta);
    require_nonzero_velocities(s);
    RSHamiltonians h{};
    for (const auto& v : s.v) h.h_plus += v;
    for (const auto& f : tbar_velocity(s, p)) h.h_minus += f;

    const RSLax lax = build_lax_rs(s, p, lambda);
    h.trace_l = lax.l.trace();
    h.trace_l_inverse = inverse(lax.l).trace();

    // tr L must equal phi(-eta, lambda) times the velocity sum at every
    // lambda; confirm at the requested value and a shifted companion.
    for (const cplx lam : {lambda, lambda + cplx(0.11, -0.07)}) {
        const cplx tr = build_lax_rs(s, p, lam).l.trace();
        const cplx expected = phi(p.lat, -p.eta, lam) * h.h_plus;
        const double scale =
            std::max({std::abs(tr), std::abs(expected), 1e-300});
        if (std::abs(tr - expected) > 1e-10 * scale)
            throw convergence_error("hamiltonians_rs: trace does not match "
                                    "the velocity sum");
    }
    return h;
}

std::vector<cplx> tbar_velocity(const ManyBodyState& s, const RSParams& p) {
    require_rs_state(s, p.lat, p.eta);
    require_nonzero_velocities(s);
    std::vector<cplx> f = velocity_products(s, p);
    for (size_t i = 0; i < f.size(); ++i) f[i] /= s.v[i];
    return f;
}

void selfdual_rhs_rs(const Lattice& lat, const std::vector<cplx>& x,
                     const std::vector<cplx>& y, cplx mu, cplx eta,
                     std::vector<cplx>& dx, std::vector<cplx>& dy) {
    if (x.size() != y.size() || x.empty())
        throw config_error("selfdual_rhs_rs: families must have equal size");
    check_distinct(lat, x);
    check_distinct(lat, y);
    const double tol = collision_margin * lat.cell_scale();
    if (lat.pole_distance(eta) < tol)
        throw config_error("shift eta lies on the period lattice");
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t j = 0; j < y.size(); ++j) {
            const cplx d = x[i] - y[j];
            if (lat.pole_distance(d) < tol)
                throw collision_error("self-dual families collided");
            if (lat.pole_distance(d - eta) < tol)
                throw collision_error("self-dual separation degenerate with "
                                      "the shift eta");
        }
    const size_t n = x.size();
    const cplx pref = -lat.sigma(eta) * std::exp(mu);
    dx.assign(n, cplx(0.0));
    dy.assign(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i) {
        cplx px = pref, py = pref;
        for (size_t k = 0; k < n; ++k) {
            if (k != i) {
                px *= lat.sigma(x[i] - x[k] - eta) / lat.sigma(x[i] - x[k]);
                py *= lat.sigma(y[i] - y[k] + eta) / lat.sigma(y[i] - y[k]);
            }
            px *= lat.sigma(x[i] - y[k]) / lat.sigma(x[i] - y[k] - eta);
            py *= lat.sigma(y[i] - x[k]) / lat.sigma(y[i] - x[k] + eta);
        }
        dx[i] = px;
        dy[i] = py;
    }
}

std::vector<cplx> discrete_rs_residual(const Lattice& lat, cplx eta,
                                       const std::vector<cplx>& x_prev,
                                       const std::vector<cplx>& x_cur,
                                       const std::vector<cplx>& x_next) {
    const size_t n = x_cur.size();
    if (x_prev.size() != n || x_next.size() != n || n == 0)
        throw config_error("discrete residual: slice sizes mismatch");
    // The middle-slice factor at k = i equals -1 exactly (sigma is
    // odd), cancelling the -1 on the right side, so a solution makes
    // each remaining log sum an integer multiple of 2 pi i.
    std::vector<cplx> f(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < n; ++k) {
            const cplx u = x_cur[i] - x_prev[k];
            f[i] += lat.log_sigma(u) - lat.log_sigma(u + eta);
            if (k != i) {
                const cplx w = x_cur[i] - x_cur[k];
                f[i] += lat.log_sigma(w + eta) - lat.log_sigma(w - eta);
            }
            const cplx v = x_cur[i] - x_next[k];
            f[i] += lat.log_sigma(v - eta) - lat.log_sigma(v);
        }
    return f;
}

std::vector<cplx> discrete_rs_step(const Lattice& lat, cplx eta,
                                   const std::vector<cplx>& x_prev,
                                   const std::vector<cplx>& x_cur,
                                   const std::vector<cplx>& guess) {
    const size_t n = x_cur.size();
    if (x_prev.size() != n || guess.size() != n || n == 0)
        throw config_error("discrete_rs_step: slice sizes mismatch");
    std::vector<cplx> u(guess);
    std::vector<cplx> target =
        discrete_rs_residual(lat, eta, x_prev, x_cur, u);
    for (auto& t : target)
        t = cplx(0.0, kTwoPi * std::round(t.imag() / kTwoPi));
    for (int it = 0; it < 50; ++it) {
        std::vector<cplx> f = discrete_rs_residual(lat, eta, x_prev, x_cur, u);
        double fn = 0;
        for (size_t i = 0; i < n; ++i) {
            f[i] -= target[i];
            if (std::abs(f[i].imag()) > kTwoPi / 2.0)
                throw convergence_error("discrete_rs_step: branch jump in "
                                        "the logarithmic residual");
            fn = std::max(fn, std::abs(f[i]));
        }
        if (fn <= 1e-10) return u;
        CMatrix jac(static_cast<int>(n));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                const cplx v = x_cur[i] - u[j];
                jac(static_cast<int>(i), static_cast<int>(j)) =
                    lat.zeta(v) - lat.zeta(v - eta);
            }
        const std::vector<cplx> delta = solve(std::move(jac), f);
        for (size_t i = 0; i < n; ++i) u[i] -= delta[i];
    }
    throw convergence_error("discrete_rs_step: Newton iteration did not "
                            "converge");
}

TodaFields toda_fields(const ManyBodyState& s, const RSParams& p,
                       cplx x_eval) {
    if (s.x.size() != s.v.size())
        throw config_error("state needs equally many positions and velocities");
    const cplx se = p.lat.sigma(p.eta);
    TodaFields out{};
    out.a = std::exp(2.0 * p.c_quad * p.eta * p.eta);
    out.b = p.r_coeff * p.eta;
    const cplx we = p.lat.wp(p.eta);
    for (size_t k = 0; k < s.x.size(); ++k) {
        const cplx d = x_eval - s.x[k];
        out.a *= se * se * (we - p.lat.wp(d));
        out.b += s.v[k] * (p.lat.zeta(d) - p.lat.zeta(d + p.eta));
    }
    return out;
}

cplx toda_field_a_sigma(const ManyBodyState& s, const RSParams& p,
                        cplx x_eval) {
    if (s.x.size() != s.v.size())
        throw config_error("state needs equally many positions and velocities");
    cplx a = std::exp(2.0 * p.c_quad * p.eta * p.eta);
    for (size_t k = 0; k < s.x.size(); ++k) {
        const cplx d = x_eval - s.x[k];
        const cplx sd = p.lat.sigma(d);
        a *= p.lat.sigma(d + p.eta) * p.lat.sigma(d - p.eta) / (sd * sd);
    }
    return a;
}

cplx wave_residual_rs(const ManyBodyState& s, const RSParams& p, cplx z,
                      cplx lambda, cplx x_eval) {
    const RSLax lax = build_lax_rs(s, p, lambda);
    const size_t n = s.x.size();
    const int ni = static_cast<int>(n);

    CMatrix shifted = lax.l;
    shifted -= z * CMatrix::identity(ni);
    double bound = 1.0;
    for (int i = 0; i < ni; ++i) {
        double row = 0;
        for (int j = 0; j < ni; ++j) row += std::abs(shifted(i, j));
        bound *= std::max(row, 1.0);
    }
    if (std::abs(determinant(shifted)) > 1e-8 * bound)
        throw config_error("wave_residual_rs: z is not an eigenvalue of L");

    std::vector<cplx> c = null_vector(shifted);
    if (std::abs(c[0]) < 1e-10)
        throw convergence_error("wave_residual_rs: null vector has vanishing "
                                "leading component");
    const cplx c0 = c[0];
    for (auto& ci : c) ci /= c0;
    const std::vector<cplx> cdot = lax.m * c;

    const cplx b = toda_fields(s, p, x_eval).b;
    cplx r = 0;
    for (size_t i = 0; i < n; ++i) {
        const cplx d = x_eval - s.x[i];
        const cplx f0 = phi(p.lat, d, lambda, 0);
        r += (z - b) * c[i] * f0 + cdot[i] * f0 -
             c[i] * s.v[i] * phi(p.lat, d, lambda, 1) -
             z * c[i] * phi(p.lat, d + p.eta, lambda, 0);
    }
    return r;
}

} // namespace ellab

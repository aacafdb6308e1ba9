#include "ellab/bkp.hpp"

#include <cmath>

namespace ellab {

namespace {

void require_state(const ManyBodyState& s, const Lattice& lat) {
    if (s.x.empty() || s.x.size() != s.v.size())
        throw config_error("state needs equally many positions and velocities");
    check_distinct(lat, s.x);
}

// Pairwise table of wp derivatives: entry (i, j) holds
// wp(x_i - x_j, order) off the diagonal and zero on it.
std::vector<std::vector<cplx>> wp_table(const Lattice& lat,
                                        const std::vector<cplx>& x,
                                        int order) {
    const size_t n = x.size();
    std::vector<std::vector<cplx>> t(n, std::vector<cplx>(n, cplx(0.0)));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (i != j) t[i][j] = lat.wp(x[i] - x[j], order);
    return t;
}

// Diagonal matrix with entries sum_{k != i} (v_i - v_k) wp'(x_ik), the
// time derivative of the plain wp diagonal along the flow.
CMatrix wp_diag_dot(const Lattice& lat, const ManyBodyState& s) {
    const int n = static_cast<int>(s.x.size());
    CMatrix m(n);
    for (int i = 0; i < n; ++i) {
        cplx sum = 0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            sum += (s.v[static_cast<size_t>(i)] - s.v[static_cast<size_t>(k)]) *
                   lat.wp(s.x[static_cast<size_t>(i)] -
                              s.x[static_cast<size_t>(k)],
                          1);
        }
        m(i, i) = sum;
    }
    return m;
}

// Analytic time derivative of the Lax matrix for a given acceleration
// slot: -diag(slot) - 6z [Xdot, B] - 6 [Xdot, C] + 6 Ddot.
CMatrix lax_dot_bkp(const ManyBodyState& s, const Lattice& lat, cplx z,
                    cplx lambda, const std::vector<cplx>& accel) {
    const CMatrix xdot = CMatrix::diagonal(s.v);
    std::vector<cplx> neg(accel);
    for (auto& w : neg) w = -w;
    CMatrix ld = CMatrix::diagonal(neg);
    ld -= (6.0 * z) * commutator(xdot, phi_matrix(lat, s.x, lambda, 1));
    ld -= 6.0 * commutator(xdot, phi_matrix(lat, s.x, lambda, 2));
    ld += 6.0 * wp_diag_dot(lat, s);
    return ld;
}

void require_nonzero_velocities(const ManyBodyState& s) {
    for (const auto& v : s.v)
        if (v == cplx(0.0))
            throw config_error("every velocity must be nonzero");
}

// Weighted wp diagonal entries sum_{k != i} v_k wp(x_ik) as a plain
// vector.
std::vector<cplx> script_d(const Lattice& lat, const ManyBodyState& s) {
    const size_t n = s.x.size();
    std::vector<cplx> d(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < n; ++k)
            if (k != i) d[i] += s.v[k] * lat.wp(s.x[i] - s.x[k]);
    return d;
}

// Coefficient matrix and right-hand side of the acceleration system of
// the derivative-coupled variant.
void nv_build_system(const ManyBodyState& s, const NVParams& p, CMatrix& mat,
                     std::vector<cplx>& rhs) {
    const size_t n = s.x.size();
    const std::vector<cplx> d = script_d(p.lat, s);
    rhs.assign(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i) {
        mat(static_cast<int>(i), static_cast<int>(i)) = d[i] + p.gamma;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            mat(static_cast<int>(i), static_cast<int>(j)) =
                -s.v[i] * p.lat.wp(s.x[i] - s.x[j]);
            rhs[i] -= s.v[i] * s.v[j] * (s.v[i] + s.v[j]) *
                      p.lat.wp(s.x[i] - s.x[j], 1);
        }
    }
}

std::vector<cplx> nv_accel_unchecked(const ManyBodyState& s,
                                     const NVParams& p) {
    const size_t n = s.x.size();
    if (n == 1) return {cplx(0.0)};
    CMatrix mat(static_cast<int>(n));
    std::vector<cplx> rhs;
    nv_build_system(s, p, mat, rhs);
    if (inf_norm(mat) * inf_norm(inverse(mat)) > 1e10)
        throw conditioning_error("nv_accel: acceleration system is too "
                                 "ill-conditioned");
    const std::vector<cplx> acc = solve(mat, rhs);
    for (size_t i = 0; i < n; ++i) {
        cplx row = 0;
        double scale = std::abs(rhs[i]);
        for (size_t j = 0; j < n; ++j) {
            const cplx term =
                mat(static_cast<int>(i), static_cast<int>(j)) * acc[j];
            row += term;
            scale = std::max(scale, std::abs(term));
        }
        if (std::abs(row - rhs[i]) > 1e-10 * std::max(scale, 1e-300))
            throw convergence_error("nv_accel: linear solve failed its row "
                                    "residual check");
    }
    return acc;
}

CMatrix nv_residual_for(const ManyBodyState& s, const NVParams& p, cplx z,
                        cplx lambda, const std::vector<cplx>& acc) {
    const NVSystem sys = nv_system(s, p, z, lambda);
    const int n = static_cast<int>(s.x.size());
    const std::vector<cplx> d = script_d(p.lat, s);

    // dL/dt = 6 Xdot^-2 Xddot (D + gamma I) - 6 Xdot^-1 Ddot
    //         - 6z [Xdot, B] - 6 [Xdot, C].
    CMatrix ld(n);
    for (int i = 0; i < n; ++i) {
        const size_t si = static_cast<size_t>(i);
        cplx ddot = 0;
        for (size_t k = 0; k < s.x.size(); ++k) {
            if (k == si) continue;
            ddot += acc[k] * p.lat.wp(s.x[si] - s.x[k]) +
                    s.v[k] * p.lat.wp(s.x[si] - s.x[k], 1) *
                        (s.v[si] - s.v[k]);
        }
        ld(i, i) = 6.0 * acc[si] * (d[si] + p.gamma) / (s.v[si] * s.v[si]) -
                   6.0 * ddot / s.v[si];
    }
    const CMatrix xdot = CMatrix::diagonal(s.v);
    ld -= (6.0 * z) * commutator(xdot, phi_matrix(p.lat, s.x, lambda, 1));
    ld -= 6.0 * commutator(xdot, phi_matrix(p.lat, s.x, lambda, 2));

    const cplx cap = 3.0 * (z * z - p.lat.wp(lambda));
    CMatrix shifted = sys.l;
    shifted -= cap * CMatrix::identity(n);
    const CMatrix a = phi_matrix(p.lat, s.x, lambda, 0);
    return ld + commutator(sys.l, sys.m) -
           2.0 * (commutator(a, xdot) * shifted);
}

} // namespace

BKPLax build_lax_bkp(const ManyBodyState& s, const Lattice& lat, cplx z,
                     cplx lambda) {
    require_state(s, lat);
    const int n = static_cast<int>(s.x.size());
    std::vector<cplx> neg_v(s.v);
    for (auto& w : neg_v) w = -w;

    CMatrix l = CMatrix::diagonal(neg_v);
    l -= (6.0 * z) * phi_matrix(lat, s.x, lambda, 0);
    l -= 6.0 * phi_matrix(lat, s.x, lambda, 1);
    l += 6.0 * wp_diag(lat, s.x, 0);

    CMatrix m = (3.0 * z * lat.wp(lambda) + 2.0 * lat.wp(lambda, 1)) *
                CMatrix::identity(n);
    m -= (6.0 * z) * phi_matrix(lat, s.x, lambda, 1);
    m -= (6.0 * z) * wp_diag(lat, s.x, 0);
    m -= 6.0 * phi_matrix(lat, s.x, lambda, 2);
    m += 6.0 * wp_diag(lat, s.x, 1);
    return {std::move(l), std::move(m)};
}

std::vector<cplx> accel_bkp(const ManyBodyState& s, const Lattice& lat) {
    require_state(s, lat);
    const size_t n = s.x.size();
    const auto wp0 = wp_table(lat, s.x, 0);
    const auto wp1 = wp_table(lat, s.x, 1);
    std::vector<cplx> acc(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i) {
        cplx two = 0, three = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            two += (s.v[i] + s.v[j]) * wp1[i][j];
            for (size_t k = 0; k < n; ++k)
                if (k != i && k != j) three += wp0[i][j] * wp1[i][k];
        }
        acc[i] = -6.0 * two + 72.0 * three;
    }
    return acc;
}

std::vector<cplx> accel_bkp_raw(const ManyBodyState& s, const Lattice& lat) {
    require_state(s, lat);
    const size_t n = s.x.size();
    const auto wp0 = wp_table(lat, s.x, 0);
    const auto wp1 = wp_table(lat, s.x, 1);
    std::vector<cplx> acc(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i) {
        cplx two = 0, full = 0, third = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            two += (s.v[i] + s.v[j]) * wp1[i][j];
            third += lat.wp(s.x[i] - s.x[j], 3);
            for (size_t k = 0; k < n; ++k)
                if (k != i) full += wp0[i][j] * wp1[i][k];
        }
        acc[i] = -6.0 * two + 72.0 * full - 6.0 * third;
    }
    return acc;
}

CMatrix manakov_residual(const ManyBodyState& s, const Lattice& lat, cplx z,
                         cplx lambda) {
    const BKPLax lm = build_lax_bkp(s, lat, z, lambda);
    const int n = static_cast<int>(s.x.size());
    const CMatrix ld = lax_dot_bkp(s, lat, z, lambda, accel_bkp(s, lat));
    const cplx cap = 3.0 * (z * z - lat.wp(lambda));
    CMatrix shifted = lm.l;
    shifted -= cap * CMatrix::identity(n);
    return ld + commutator(lm.l, lm.m) +
           12.0 * (wp_diag(lat, s.x, 1) * shifted);
}

CMatrix manakov_identity_residual(const ManyBodyState& s, const Lattice& lat,
                                  cplx z, cplx lambda,
                                  const std::vector<cplx>& accel_slot) {
    if (accel_slot.size() != s.x.size())
        throw config_error("manakov_identity_residual: slot size mismatch");
    const BKPLax lm = build_lax_bkp(s, lat, z, lambda);
    const int n = static_cast<int>(s.x.size());
    const cplx cap = 3.0 * (z * z - lat.wp(lambda));
    CMatrix shifted = lm.l;
    shifted -= cap * CMatrix::identity(n);
    const CMatrix dp = wp_diag(lat, s.x, 1);

    CMatrix r = lax_dot_bkp(s, lat, z, lambda, accel_slot);
    r += commutator(lm.l, lm.m);
    r += 12.0 * (dp * shifted);
    r += CMatrix::diagonal(accel_slot);
    CMatrix inner = 6.0 * wp_diag(lat, s.x, 0);
    inner -= CMatrix::diagonal(s.v);
    r -= 12.0 * (dp * inner);
    r -= 6.0 * wp_diag_dot(lat, s);
    r += 6.0 * wp_diag(lat, s.x, 3);
    return r;
}

BKPIntegrals integrals_bkp(const ManyBodyState& s, const Lattice& lat) {
    require_state(s, lat);
    const size_t n = s.x.size();
    const auto wp0 = wp_table(lat, s.x, 0);
    BKPIntegrals out{};
    for (size_t i = 0; i < n; ++i) {
        out.i1 += s.v[i];
        out.i2 += 0.5 * s.v[i] * s.v[i];
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            out.i2 += 6.0 * s.v[i] * wp0[i][j];
            for (size_t k = 0; k < n; ++k)
                if (k != i && k != j) out.i2 -= 18.0 * wp0[i][j] * wp0[i][k];
        }
    }

    CMatrix m = CMatrix::diagonal(s.v);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            m(static_cast<int>(i), static_cast<int>(j)) -= 6.0 * wp0[i][j];
    for (size_t i = 0; i < n; ++i) {
        cplx row = 0;
        for (size_t k = 0; k < n; ++k)
            if (k != i) row += wp0[i][k];
        m(static_cast<int>(i), static_cast<int>(i)) -= 6.0 * row;
    }
    out.j = determinant(std::move(m));

    if (n == 3) {
        cplx i3 = 0;
        for (size_t i = 0; i < 3; ++i) {
            i3 += s.v[i] * s.v[i] * s.v[i] / 3.0;
            for (size_t j = 0; j < 3; ++j)
                if (j != i) i3 += 6.0 * s.v[i] * s.v[i] * wp0[i][j];
        }
        i3 += 12.0 * (s.v[0] * s.v[1] * wp0[0][1] + s.v[0] * s.v[2] * wp0[0][2] +
                      s.v[1] * s.v[2] * wp0[1][2]);
        i3 -= 864.0 * wp0[0][1] * wp0[0][2] * wp0[1][2];
        out.i3 = i3;
    }
    return out;
}

cplx curve_value_bkp(const ManyBodyState& s, const Lattice& lat, cplx z,
                     cplx lambda) {
    require_state(s, lat);
    const int n = static_cast<int>(s.x.size());
    std::vector<cplx> neg_v(s.v);
    for (auto& w : neg_v) w = -w;
    CMatrix l = CMatrix::diagonal(neg_v);
    l -= (6.0 * z) * phi_matrix(lat, s.x, lambda, 0, true);
    l -= 6.0 * phi_matrix(lat, s.x, lambda, 1, true);
    l += 6.0 * wp_diag(lat, s.x, 0);
    CMatrix m = (3.0 * (z * z - lat.wp(lambda))) * CMatrix::identity(n);
    m -= l;
    return determinant(std::move(m));
}

PolyInZ spectral_curve_bkp(const ManyBodyState& s, const Lattice& lat,
                           cplx lambda) {
    require_state(s, lat);
    const int n = static_cast<int>(s.x.size());
    std::vector<cplx> neg_v(s.v);
    for (auto& w : neg_v) w = -w;
    CMatrix base = CMatrix::diagonal(neg_v);
    base -= 6.0 * phi_matrix(lat, s.x, lambda, 1, true);
    base += 6.0 * wp_diag(lat, s.x, 0);
    const CMatrix a = phi_matrix(lat, s.x, lambda, 0, true);
    const cplx wl = lat.wp(lambda);
    const auto builder = [&](cplx z) {
        CMatrix m = (3.0 * (z * z - wl)) * CMatrix::identity(n);
        m -= base;
        m += (6.0 * z) * a;
        return m;
    };
    return charpoly_in_z(builder, 2 * n, circle_nodes(2 * n + 1, 1.5));
}

std::vector<cplx> rational_accel_bkp(const std::vector<cplx>& x,
                                     const std::vector<cplx>& v) {
    const size_t n = x.size();
    if (n == 0 || v.size() != n)
        throw config_error("rational_accel_bkp: size mismatch");
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (x[i] == x[j])
                throw collision_error("rational_accel_bkp: coincident "
                                      "positions");
    std::vector<cplx> acc(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const cplx dij = x[i] - x[j];
            acc[i] += 12.0 * (v[i] + v[j]) / (dij * dij * dij);
            for (size_t k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                const cplx dik = x[i] - x[k];
                acc[i] -= 144.0 / (dij * dij * dik * dik * dik);
            }
        }
    }
    return acc;
}

void selfdual_rhs_bkp(const Lattice& lat, const std::vector<cplx>& x,
                      const std::vector<cplx>& y, cplx mu,
                      std::vector<cplx>& dx, std::vector<cplx>& dy) {
    if (x.size() != y.size() || x.empty())
        throw config_error("selfdual_rhs_bkp: families must have equal size");
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
        cplx wx = 0, zx_same = 0, zx_cross = 0;
        cplx wy = 0, zy_same = 0, zy_cross = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j != i) {
                wx += lat.wp(x[i] - x[j]);
                zx_same += lat.zeta(x[i] - x[j]);
                wy += lat.wp(y[i] - y[j]);
                zy_same += lat.zeta(y[i] - y[j]);
            }
            wx += lat.wp(x[i] - y[j]);
            zx_cross += lat.zeta(x[i] - y[j]);
            wy += lat.wp(y[i] - x[j]);
            zy_cross += lat.zeta(y[i] - x[j]);
        }
        const cplx gx = zx_same - zx_cross;
        const cplx gy = zy_same - zy_cross;
        dx[i] = 3.0 * wx - 3.0 * gx * gx + 6.0 * mu * gx - 3.0 * mu * mu;
        dy[i] = 3.0 * wy - 3.0 * gy * gy - 6.0 * mu * gy - 3.0 * mu * mu;
    }
}

NVSystem nv_system(const ManyBodyState& s, const NVParams& p, cplx z,
                   cplx lambda) {
    require_state(s, p.lat);
    require_nonzero_velocities(s);
    if (z == cplx(0.0))
        throw config_error("nv_system: z must be nonzero");
    const int n = static_cast<int>(s.x.size());
    const std::vector<cplx> d = script_d(p.lat, s);

    CMatrix l(n);
    for (int i = 0; i < n; ++i)
        l(i, i) = -6.0 * (d[static_cast<size_t>(i)] + p.gamma) /
                  s.v[static_cast<size_t>(i)];
    l -= (6.0 * z) * phi_matrix(p.lat, s.x, lambda, 0);
    l -= 6.0 * phi_matrix(p.lat, s.x, lambda, 1);

    const CMatrix xdot = CMatrix::diagonal(s.v);
    CMatrix m = (-1.0 / z) * CMatrix::identity(n);
    m += z * xdot;
    m += 2.0 * (xdot * phi_matrix(p.lat, s.x, lambda, 0));
    return {std::move(l), std::move(m)};
}

std::vector<cplx> nv_accel(const ManyBodyState& s, const NVParams& p) {
    require_state(s, p.lat);
    require_nonzero_velocities(s);
    const std::vector<cplx> acc = nv_accel_unchecked(s, p);
    if (s.x.size() == 1) return acc;
    const cplx z_check{0.41, -0.19};
    const CMatrix r =
        nv_residual_for(s, p, z_check, p.lambda_default, acc);
    const NVSystem sys = nv_system(s, p, z_check, p.lambda_default);
    const double scale =
        std::max({inf_norm(sys.l), inf_norm(sys.m), 1.0});
    if (r.max_abs() > 1e-9 * scale)
        throw convergence_error("nv_accel: accelerations fail the Manakov "
                                "relation check");
    return acc;
}

CMatrix nv_manakov_residual(const ManyBodyState& s, const NVParams& p, cplx z,
                            cplx lambda) {
    require_state(s, p.lat);
    require_nonzero_velocities(s);
    return nv_residual_for(s, p, z, lambda, nv_accel_unchecked(s, p));
}

std::vector<cplx> rational_accel_nv(const std::vector<cplx>& x,
                                    const std::vector<cplx>& v) {
    const size_t n = x.size();
    if (n == 0 || v.size() != n)
        throw config_error("rational_accel_nv: size mismatch");
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (x[i] == x[j])
                throw collision_error("rational_accel_nv: coincident "
                                      "positions");
    std::vector<cplx> acc(n, cplx(0.0));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (j != i) acc[i] += 2.0 * v[i] * v[j] / (x[i] - x[j]);
    return acc;
}

} // namespace ellab

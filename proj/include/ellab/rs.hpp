#pragma once

#include "ellab/manybody.hpp"
#include "ellab/poly.hpp"

namespace ellab {

// Parameters of the relativistic (shift-coupled) flow: the lattice,
// the shift eta, a default spectral parameter, and the two scalar
// couplings that enter the reconstructed fields.
struct RSParams {
    Lattice lat;
    cplx eta{0.17, -0.08};
    cplx lambda_default{0.37, 0.21};
    cplx c_quad{0.0, 0.0};
    cplx r_coeff{0.0, 0.0};
};

struct RSLax {
    CMatrix l;
    CMatrix m;
};

// Lax matrix L = Xdot A(-eta) (the shifted kernel matrix keeps its
// diagonal) together with the flow generator M.
RSLax build_lax_rs(const ManyBodyState& s, const RSParams& p, cplx lambda);

// Accelerations of the shift-coupled flow, in the form with the
// wp'(x_ik) / (wp(eta) - wp(x_ik)) quotient.
std::vector<cplx> accel_rs(const ManyBodyState& s, const RSParams& p);

// The same accelerations through the zeta-difference combination
// zeta(u+eta) + zeta(u-eta) - 2 zeta(u); kept separate so tests can
// confirm the two printed forms agree.
std::vector<cplx> accel_rs_zeta(const ManyBodyState& s, const RSParams& p);

// Residual of dL/dt + [L, M] - (Xddot Xdot^-1 + D+ + D- - 2 D0) L with
// on-shell accelerations.  Requires nonzero velocities.
CMatrix rs_identity_residual(const ManyBodyState& s, const RSParams& p,
                             cplx lambda);

struct RSHamiltonians {
    cplx h_plus;          // sum of first-flow velocities
    cplx h_minus;         // sum of opposite-flow velocities
    cplx trace_l;         // tr L at the requested lambda
    cplx trace_l_inverse; // tr L^-1 at the requested lambda
};

// Conserved sums of the two first-order flows, with trace cross-checks
// evaluated at the requested lambda and a shifted companion value.
RSHamiltonians hamiltonians_rs(const ManyBodyState& s, const RSParams& p,
                               cplx lambda);

// Velocities of the opposite first-order flow from the sigma-product
// formula.  Requires every forward velocity nonzero.
std::vector<cplx> tbar_velocity(const ManyBodyState& s, const RSParams& p);

// First-order self-dual flow on two families of poles coupled through
// sigma ratios shifted by eta.
void selfdual_rhs_rs(const Lattice& lat, const std::vector<cplx>& x,
                     const std::vector<cplx>& y, cplx mu, cplx eta,
                     std::vector<cplx>& dx, std::vector<cplx>& dy);

// Logarithmic residual of the discrete-time equations on a triple of
// slices: entry i must be an integer multiple of 2 pi i at a solution.
std::vector<cplx> discrete_rs_residual(const Lattice& lat, cplx eta,
                                       const std::vector<cplx>& x_prev,
                                       const std::vector<cplx>& x_cur,
                                       const std::vector<cplx>& x_next);

// Newton solve of the discrete-time equations for the next slice,
// with the branch fixed by the initial guess.
std::vector<cplx> discrete_rs_step(const Lattice& lat, cplx eta,
                                   const std::vector<cplx>& x_prev,
                                   const std::vector<cplx>& x_cur,
                                   const std::vector<cplx>& guess);

struct TodaFields {
    cplx a;
    cplx b;
};

// Field values reconstructed from the pole data: a(x) through the
// wp-product form, b(x) through the zeta-difference sum.
TodaFields toda_fields(const ManyBodyState& s, const RSParams& p, cplx x_eval);

// a(x) through the sigma-ratio form, for cross-checking toda_fields.
cplx toda_field_a_sigma(const ManyBodyState& s, const RSParams& p,
                        cplx x_eval);

// Residual of the shifted first linear problem on the pole ansatz at a
// generic evaluation point; z must be an eigenvalue of L.
cplx wave_residual_rs(const ManyBodyState& s, const RSParams& p, cplx z,
                      cplx lambda, cplx x_eval);

} // namespace ellab

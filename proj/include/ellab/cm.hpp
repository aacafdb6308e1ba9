#pragma once

#include "ellab/dynamics.hpp"
#include "ellab/manybody.hpp"
#include "ellab/poly.hpp"

namespace ellab {

// Parameters of the elliptic Calogero-Moser family.  `hbar` scales the
// off-diagonal coupling, `c_quad` and `b_quad` are the two background
// constants entering the second and third flows, `lambda_default` is
// the spectral parameter used when none is supplied.
struct CMParams {
    Lattice lat;
    cplx hbar{1.0, 0.0};
    cplx c_quad{0.0, 0.0};
    cplx b_quad{0.0, 0.0};
    cplx lambda_default{0.37, 0.21};
};

struct LaxPair {
    CMatrix l;
    CMatrix m;
};

// Lax pair of the second flow.  The pair itself does not depend on z;
// the parameter is kept so every system exposes the same signature.
LaxPair build_lax_t2(const ManyBodyState& s, const CMParams& p, cplx z,
                     cplx lambda);

// Accelerations of the second flow: 4 hbar^2 sum_{j != i} wp'(x_ij).
std::vector<cplx> accel_t2(const ManyBodyState& s, const CMParams& p);

// dL/dt - [M, L] with the on-shell accelerations substituted for dv/dt.
// Vanishes identically on any state.
CMatrix lax_identity_residual(const ManyBodyState& s, const CMParams& p, cplx z,
                              cplx lambda);

struct CMHamiltonians {
    cplx h1, h2, h3;          // momentum-space forms (p_i = v_i / 2)
    cplx h2_trace, h3_trace;  // equivalent spectral forms built from L
};

CMHamiltonians hamiltonians(const ManyBodyState& s, const CMParams& p,
                            cplx lambda);

// Velocities and accelerations of the third flow (requires hbar = 1).
struct T3Flow {
    std::vector<cplx> velocity;
    std::vector<cplx> accel;
};

T3Flow flow_t3(const ManyBodyState& s, const CMParams& p);

// Generator of the third flow on the Lax matrix.  Like build_lax_t2,
// the z argument only keeps the signature uniform.
CMatrix build_T(const ManyBodyState& s, const CMParams& p, cplx z, cplx lambda);

// d/dt3 L + [L, T] with the supplied acceleration slot.  With the
// on-shell slot from flow_t3 the result is the zero matrix; a generic
// slot leaves diag(accel_onshell - slot).
CMatrix t3_residual(const ManyBodyState& s, const CMParams& p, cplx lambda,
                    const std::vector<cplx>& accel_slot);

// Characteristic polynomial R(z) = det(2 z I - L) as a polynomial in z,
// built from the gauge-stripped kernel so coefficients are independent
// of the exponential gauge.
PolyInZ spectral_curve(const ManyBodyState& s, const CMParams& p, cplx lambda);

// First-order self-dual flow on two N-particle families.
void selfdual_rhs(const Lattice& lat, const std::vector<cplx>& x,
                  const std::vector<cplx>& y, cplx mu, std::vector<cplx>& dx,
                  std::vector<cplx>& dy);

// Residual of the discrete-time equations at three consecutive slices.
std::vector<cplx> discrete_cm_residual(const Lattice& lat,
                                       const std::vector<cplx>& x_prev,
                                       const std::vector<cplx>& x_cur,
                                       const std::vector<cplx>& x_next);

// Solve the discrete-time equations for the next slice by Newton
// iteration from `guess`.
std::vector<cplx> discrete_cm_step(const Lattice& lat,
                                   const std::vector<cplx>& x_prev,
                                   const std::vector<cplx>& x_cur,
                                   const std::vector<cplx>& guess);

// Residual of the linear problem pair for the second flow at a point
// x_eval away from the particles, with z a point on the spectral curve
// (the common exponential factor removed).  Requires hbar = 1.
cplx wave_residual_t2(const ManyBodyState& s, const CMParams& p, cplx z,
                      cplx lambda, cplx x_eval);

} // namespace ellab

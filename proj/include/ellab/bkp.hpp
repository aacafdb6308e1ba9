#pragma once

#include <optional>

#include "ellab/manybody.hpp"
#include "ellab/poly.hpp"

namespace ellab {

// Lax pair of the three-body-coupled flow at spectral parameters
// (z, lambda).
struct BKPLax {
    CMatrix l;
    CMatrix m;
};

BKPLax build_lax_bkp(const ManyBodyState& s, const Lattice& lat, cplx z,
                     cplx lambda);

// Accelerations of the flow: a pairwise part plus a genuine three-body
// coupling through products of wp values over distinct neighbours.
std::vector<cplx> accel_bkp(const ManyBodyState& s, const Lattice& lat);

// Same accelerations before collapsing the diagonal of the double sum
// with the wp''' identity.  Kept separate so tests can confirm the two
// expressions agree to machine precision.
std::vector<cplx> accel_bkp_raw(const ManyBodyState& s, const Lattice& lat);

// Residual of dL/dt + [L, M] + 12 D'(L - Lambda I) with the on-shell
// accelerations, where Lambda = 3(z^2 - wp(lambda)).
CMatrix manakov_residual(const ManyBodyState& s, const Lattice& lat, cplx z,
                         cplx lambda);

// Acceleration-independent form of the same relation: substituting an
// arbitrary diagonal slot for diag(xddot) and adding the closed-form
// counterterms must give zero for any state and any slot.
CMatrix manakov_identity_residual(const ManyBodyState& s, const Lattice& lat,
                                  cplx z, cplx lambda,
                                  const std::vector<cplx>& accel_slot);

struct BKPIntegrals {
    cplx i1;
    cplx i2;
    cplx j;
    std::optional<cplx> i3; // present for three particles only
};

BKPIntegrals integrals_bkp(const ManyBodyState& s, const Lattice& lat);

// Value of det(3(z^2 - wp(lambda)) I - L(z, lambda)) with the
// gauge-stripped kernel, so small lambda stays representable.
cplx curve_value_bkp(const ManyBodyState& s, const Lattice& lat, cplx z,
                     cplx lambda);

// The same determinant fitted as a polynomial in z (degree 2N).
PolyInZ spectral_curve_bkp(const ManyBodyState& s, const Lattice& lat,
                           cplx lambda);

// Degenerate-lattice accelerations with 1/x^2 in place of wp.
std::vector<cplx> rational_accel_bkp(const std::vector<cplx>& x,
                                     const std::vector<cplx>& v);

// First-order self-dual flow on two opposite families of poles.
void selfdual_rhs_bkp(const Lattice& lat, const std::vector<cplx>& x,
                      const std::vector<cplx>& y, cplx mu,
                      std::vector<cplx>& dx, std::vector<cplx>& dy);

// Parameters of the derivative-coupled variant, where the dynamical
// velocities enter the operators themselves.
struct NVParams {
    Lattice lat;
    cplx gamma{0.0, 0.0};
    cplx lambda_default{0.37, 0.21};
};

struct NVSystem {
    CMatrix l;
    CMatrix m;
};

// Auxiliary linear operators at spectral parameters (z, lambda).
// Requires z != 0 and every velocity nonzero.
NVSystem nv_system(const ManyBodyState& s, const NVParams& p, cplx z,
                   cplx lambda);

// Accelerations from the coupled linear system.  The solution is
// validated twice before being returned: the row residuals of the
// solve, and the Manakov relation at a fixed interior spectral point.
std::vector<cplx> nv_accel(const ManyBodyState& s, const NVParams& p);

// Residual of dL/dt + [L, M] - 2 [A, Xdot] (L - Lambda I) with the
// accelerations from the linear system.
CMatrix nv_manakov_residual(const ManyBodyState& s, const NVParams& p, cplx z,
                            cplx lambda);

// Degenerate-lattice accelerations of the derivative-coupled variant
// at gamma = 0.
std::vector<cplx> rational_accel_nv(const std::vector<cplx>& x,
                                    const std::vector<cplx>& v);

} // namespace ellab

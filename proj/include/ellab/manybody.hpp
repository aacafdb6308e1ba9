#pragma once

#include "ellab/lattice.hpp"
#include "ellab/matrix.hpp"

namespace ellab {

// Positions and velocities of an N-particle configuration at time t.
struct ManyBodyState {
    double t = 0;
    std::vector<cplx> x;
    std::vector<cplx> v;
};

// Reduced pairwise distance below which two particles count as collided.
inline constexpr double collision_margin = 1e-6;

// Throws collision_error if any two coordinates coincide modulo the
// lattice (within margin times the cell scale).
void check_distinct(const Lattice& lat, const std::vector<cplx>& x,
                    double margin = collision_margin);

// Off-diagonal matrix of kernel values: entry (i, j) is
// phi(x_i - x_j + shift, lambda) of the requested derivative order,
// zero on the diagonal.  With `stripped` set the gauge-stripped kernel
// is used instead.
CMatrix phi_matrix(const Lattice& lat, const std::vector<cplx>& x, cplx lambda,
                   int order, bool stripped = false, cplx shift = cplx(0.0));

// Full matrix variant: the diagonal holds phi(shift, lambda) itself
// rather than zero (the i = j entry of the shifted kernel).
CMatrix phi_matrix_full(const Lattice& lat, const std::vector<cplx>& x,
                        cplx lambda, int order, bool stripped = false,
                        cplx shift = cplx(0.0));

// Diagonal matrix with entries sum_{k != i} wp(x_i - x_k) of the given
// derivative order.
CMatrix wp_diag(const Lattice& lat, const std::vector<cplx>& x, int order);

// Diagonal matrix with entries sum_{k != i} w_k * wp(x_i - x_k).
CMatrix wp_diag_weighted(const Lattice& lat, const std::vector<cplx>& x,
                         const std::vector<cplx>& w, int order);

// Diagonal matrix with entries sum_{k != i} w_k * zeta(x_i - x_k + shift).
CMatrix zeta_diag_weighted(const Lattice& lat, const std::vector<cplx>& x,
                           const std::vector<cplx>& w, cplx shift = cplx(0.0));

} // namespace ellab

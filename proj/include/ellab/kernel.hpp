#pragma once

#include "ellab/lattice.hpp"

namespace ellab {

// The two-variable kernel
//   phi(x, lambda) = sigma(x + lambda) * exp(-zeta(lambda) * x)
//                    / (sigma(lambda) * sigma(x)),
// with x-derivatives up to third order.  Near x = 0 it expands as
// 1/x - wp(lambda)/2 * x + O(x^2), with no constant term.
//
// Throws pole_error if x, lambda or x + lambda reduces to a lattice
// point (derivative formulas involve zeta(x + lambda)).
cplx phi(const Lattice& lat, cplx x, cplx lambda, int order = 0);

// Gauge-stripped kernel
//   phi_stripped(x, lambda) = sigma(x + lambda) / (sigma(lambda) * sigma(x))
//                           = phi(x, lambda) * exp(zeta(lambda) * x).
// For order > 0 this is exp(zeta(lambda) * x) times the corresponding
// derivative of phi, i.e. the same polynomial prefactors applied to
// the stripped zeroth order, not the derivative of phi_stripped itself.
// The stripped kernel is single-valued in lambda up to lattice shifts
// of x and keeps determinant and trace computations free of the
// exponential gauge factor.
cplx phi_stripped(const Lattice& lat, cplx x, cplx lambda, int order = 0);

} // namespace ellab

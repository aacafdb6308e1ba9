#include "ellab/kernel.hpp"

namespace ellab {

namespace {

cplx phi_core(const Lattice& lat, cplx x, cplx lambda, int order, bool stripped) {
    if (order < 0 || order > 3)
        throw config_error("phi: order must be 0, 1, 2 or 3");
    if (lat.pole_distance(x) < Lattice::pole_tol)
        throw pole_error("phi: x reduces to a lattice point");
    if (lat.pole_distance(lambda) < Lattice::pole_tol)
        throw pole_error("phi: lambda reduces to a lattice point");
    if (lat.pole_distance(x + lambda) < Lattice::pole_tol)
        throw pole_error("phi: x + lambda reduces to a lattice point");

    const cplx base = lat.sigma(x + lambda) / (lat.sigma(lambda) * lat.sigma(x));
    const cplx f = stripped ? base : base * std::exp(-lat.zeta(lambda) * x);
    if (order == 0) return f;

    const cplx g = lat.zeta(x + lambda) - lat.zeta(x) - lat.zeta(lambda);
    if (order == 1) return f * g;

    const cplx dp = lat.wp(x) - lat.wp(x + lambda);
    if (order == 2) return f * (g * g + dp);

    const cplx dp1 = lat.wp(x, 1) - lat.wp(x + lambda, 1);
    return f * (g * g * g + 3.0 * g * dp + dp1);
}

} // namespace

cplx phi(const Lattice& lat, cplx x, cplx lambda, int order) {
    return phi_core(lat, x, lambda, order, false);
}

cplx phi_stripped(const Lattice& lat, cplx x, cplx lambda, int order) {
    return phi_core(lat, x, lambda, order, true);
}

} // namespace ellab

#pragma once

#include <functional>

#include "ellab/matrix.hpp"

namespace ellab {

// Polynomial in one complex variable, coefficients in ascending order
// with trailing near-zero coefficients trimmed.
struct PolyInZ {
    std::vector<cplx> c;

    int degree() const { return static_cast<int>(c.size()) - 1; }

    cplx eval(cplx z) const {
        cplx acc = 0;
        for (size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
        return acc;
    }
};

// Trim trailing coefficients smaller than 1e-12 times the largest one.
PolyInZ make_poly(std::vector<cplx> coeffs);

// Equally spaced nodes on a circle of the given radius.
std::vector<cplx> circle_nodes(int count, double radius);

// Interpolate det(builder(z)) as a polynomial of the stated degree
// through the given nodes (one more node than the degree).  Throws
// conditioning_error if the Vandermonde system is too ill-conditioned.
PolyInZ charpoly_in_z(const std::function<CMatrix(cplx)>& builder, int degree,
                      const std::vector<cplx>& nodes);

// All roots by simultaneous (Durand-Kerner) iteration.
std::vector<cplx> poly_roots(const PolyInZ& p);

} // namespace ellab

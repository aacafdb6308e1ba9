#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ellab/lattice.hpp"

namespace ellab {

struct IdentityResult {
    std::string name;
    double max_rel_residual = 0;
};

// Run the whole corpus of scalar function identities (kernel addition
// and reflection formulas, zeta/wp addition formulas, the wp
// differential equation, and the many-point cancellation sums) at
// `trials` random argument tuples drawn from the period cell of `lat`
// with a pole-avoidance margin.  Each residual is normalized by the
// largest additive term entering the identity, so results are
// relative to the natural scale of the expression.
std::vector<IdentityResult> identity_suite(const Lattice& lat, int trials,
                                           std::uint64_t seed);

} // namespace ellab

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ellab/lattice.hpp"

namespace ellab {

// Deterministic random source.  mt19937_64 output is fixed by the
// standard, and the mapping to doubles below avoids distribution
// classes whose behaviour varies between standard libraries, so a
// given seed produces the same stream everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform in the open period cell centred on the origin.
    cplx cell_point(const Lattice& lat) {
        const double u = uniform() - 0.5;
        const double v = uniform() - 0.5;
        return 2.0 * u * lat.omega() + 2.0 * v * lat.omega_prime();
    }

    // Uniform on the unit disk.
    cplx unit_disk() {
        const double r = std::sqrt(uniform());
        const double a = 2.0 * std::acos(-1.0) * uniform();
        return cplx(r * std::cos(a), r * std::sin(a));
    }

private:
    std::mt19937_64 eng_;
};

} // namespace ellab

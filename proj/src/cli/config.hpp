#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ellab/lattice.hpp"

namespace ellab::cli {

struct TimeSpec {
    double t_end = 1.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
};

// Fully resolved scenario: file contents merged with defaults and
// command-line overrides.  Complex values in the file may be written
// as a plain number or as a [re, im] pair.
struct Scenario {
    std::string system = "cm-kp";
    cplx omega{0.5, 0.0};
    cplx omega_prime{0.15, 0.55};
    int particles = 3;
    std::vector<cplx> positions;  // empty means draw from the seed
    std::vector<cplx> velocities; // empty means draw from the seed
    std::uint64_t seed = 1;
    cplx eta{0.17, -0.08};
    cplx lambda{0.37, 0.21};
    cplx z{0.31, -0.27};
    cplx mu{0.0, 0.0};
    cplx hbar{1.0, 0.0};
    cplx c{0.0, 0.0};
    cplx b{0.0, 0.0};
    cplx gamma{0.0, 0.0};
    cplx r{0.0, 0.0};
    TimeSpec time;
    std::vector<std::string> checks; // empty means every check of the subcommand
    int trials = 100;                // verify-identities sample count
    int steps = 5;                   // discrete map iterations
    std::optional<double> tol_override;
};

// Parse a scenario file.  Throws config_error naming the offending key
// for anything malformed, unknown, or out of range.
Scenario load_scenario(const std::string& path);

// Canonical single-line dump of the effective scenario (after
// command-line overrides) and the FNV-1a hash of that dump.  The hash
// is embedded in every report so outputs can be traced to their exact
// inputs.
std::string normalized_dump(const Scenario& s);
std::string config_digest(const Scenario& s);

} // namespace ellab::cli

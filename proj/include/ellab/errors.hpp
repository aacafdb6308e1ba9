#pragma once

#include <stdexcept>
#include <string>

namespace ellab {

// Argument landed on (or too close to) a lattice point where the
// requested function has a pole.
class pole_error : public std::runtime_error {
public:
    explicit pole_error(const std::string& what) : std::runtime_error(what) {}
};

// Two particle coordinates collided modulo the lattice, or a
// coordinate difference hit a forbidden shift of the lattice.
class collision_error : public std::runtime_error {
public:
    explicit collision_error(const std::string& what) : std::runtime_error(what) {}
};

// An iteration (series summation, Newton solve, root finder, adaptive
// stepper) failed to reach its tolerance within its budget.
class convergence_error : public std::runtime_error {
public:
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

// A linear-algebra subproblem is too ill-conditioned to trust.
class conditioning_error : public std::runtime_error {
public:
    explicit conditioning_error(const std::string& what) : std::runtime_error(what) {}
};

// User-supplied parameters violate a precondition.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ellab

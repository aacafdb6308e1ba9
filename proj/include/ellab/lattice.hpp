#pragma once

#include <complex>

#include "ellab/errors.hpp"

namespace ellab {

using cplx = std::complex<double>;

// Result of reducing an argument into the fundamental cell.
// x = x_reduced + 2*m*omega + 2*m_prime*omega_prime, and
// sigma(x) = exp(log_quasi_factor) * sigma(x_reduced).
struct ReducedArgument {
    cplx x_reduced;
    long long m = 0;
    long long m_prime = 0;
    cplx log_quasi_factor;
};

// A rank-two period lattice with half-periods (omega, omega_prime),
// normalized so that Im(omega_prime / omega) > 0.  Evaluates the
// Weierstrass sigma, zeta and wp functions (wp up to its third
// derivative) through the first Jacobi theta function in the nome
// q = exp(i*pi*omega_prime/omega), with quasi-periodic reduction of
// arguments into the fundamental cell.
class Lattice {
public:
    Lattice(cplx omega, cplx omega_prime);

    cplx omega() const { return omega_; }
    cplx omega_prime() const { return omega_prime_; }
    cplx tau() const { return tau_; }
    cplx nome() const { return q_; }
    cplx eta1() const { return eta1_; }   // zeta(omega)
    cplx eta2() const { return eta2_; }   // zeta(omega_prime)
    cplx g2() const { return g2_; }
    cplx g3() const { return g3_; }

    // Shortest primitive period length, min(|2 omega|, |2 omega'|).
    // Used to scale pole margins and collision thresholds.
    double cell_scale() const { return cell_scale_; }

    // Distance below which an argument counts as sitting on a pole.
    static constexpr double pole_tol = 1e-8;

    // Reduce x into the fundamental cell centred on the origin.
    // Total: never throws for finite x.
    ReducedArgument reduce(cplx x) const;

    // Distance from x (after reduction) to the nearest lattice point.
    double pole_distance(cplx x) const;

    // Weierstrass sigma.  Entire; returns 0 exactly at lattice points.
    cplx sigma(cplx x) const;

    // log sigma(x) with the quasi-periodic factor folded in as
    // log_quasi_factor + Log sigma(x_reduced) (principal branch of the
    // reduced value).  Throws pole_error at lattice points.
    cplx log_sigma(cplx x) const;

    // Weierstrass zeta.  Throws pole_error within pole_tol of a
    // lattice point.
    cplx zeta(cplx x) const;

    // Weierstrass wp and derivatives: order 0..3 gives wp, wp', wp'',
    // wp'''.  Throws pole_error within pole_tol of a lattice point.
    cplx wp(cplx x, int order = 0) const;

private:
    cplx omega_, omega_prime_, tau_, q_, log_q_;
    cplx eta1_, eta2_, g2_, g3_;
    cplx theta1_prime0_;
    double cell_scale_ = 0;  // min(|2 omega|, |2 omega'|)

    // theta_1 and derivatives d^m/dv^m for m = 0..5 at v.
    void theta1_derivs(cplx v, cplx out[6]) const;
};

} // namespace ellab

#include "ellab/lattice.hpp"

#include <cmath>
#include <limits>

namespace ellab {

namespace {

constexpr double kSeriesEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kThetaMaxTerms = 64;
constexpr int kEisensteinMaxTerms = 20000;

// sum_{n>=1} n^e p^n / (1 - p^n) for e in {1, 3, 5}.
cplx eisenstein_sum(cplx p, int e) {
    cplx sum = 0;
    cplx pn = 1.0;
    int streak = 0;
    for (int n = 1; n <= kEisensteinMaxTerms; ++n) {
        pn *= p;
        double ne = std::pow(static_cast<double>(n), e);
        cplx term = ne * pn / (1.0 - pn);
        sum += term;
        if (std::abs(term) <= 1e-18 * (std::abs(sum) + kTiny)) {
            if (++streak >= 2) return sum;
        } else {
            streak = 0;
        }
    }
    throw convergence_error("eisenstein series did not converge");
}

} // namespace

Lattice::Lattice(cplx omega, cplx omega_prime)
    : omega_(omega), omega_prime_(omega_prime) {
    if (!std::isfinite(omega.real()) || !std::isfinite(omega.imag()) ||
        !std::isfinite(omega_prime.real()) || !std::isfinite(omega_prime.imag()))
        throw config_error("lattice half-periods must be finite");
    if (omega == cplx(0.0))
        throw config_error("lattice half-period omega must be nonzero");
    tau_ = omega_prime_ / omega_;
    if (!(tau_.imag() > 0.0))
        throw config_error("lattice requires Im(omega_prime/omega) > 0");
    const cplx ipi(0.0, std::acos(-1.0));
    log_q_ = ipi * tau_;
    q_ = std::exp(log_q_);
    if (std::abs(q_) >= 0.95)
        throw config_error("lattice nome too close to the unit circle");

    const double pi = std::acos(-1.0);
    const cplx p = q_ * q_;
    const cplx e2 = 1.0 - 24.0 * eisenstein_sum(p, 1);
    const cplx e4 = 1.0 + 240.0 * eisenstein_sum(p, 3);
    const cplx e6 = 1.0 - 504.0 * eisenstein_sum(p, 5);
    const cplx k = pi / (2.0 * omega_);
    eta1_ = pi * pi * e2 / (12.0 * omega_);
    eta2_ = (eta1_ * omega_prime_ - ipi / 2.0) / omega_;
    g2_ = (4.0 / 3.0) * k * k * k * k * e4;
    g3_ = (8.0 / 27.0) * k * k * k * k * k * k * e6;
    cell_scale_ = std::min(std::abs(2.0 * omega_), std::abs(2.0 * omega_prime_));
    cplx th0[6];
    theta1_derivs(cplx(0.0), th0);
    theta1_prime0_ = th0[1];
}

void Lattice::theta1_derivs(cplx v, cplx out[6]) const {
    for (int m = 0; m < 6; ++m) out[m] = 0;
    int streak = 0;
    for (int n = 0; n <= kThetaMaxTerms; ++n) {
        const double half = n + 0.5;
        const cplx base = 2.0 * std::exp(log_q_ * (half * half));
        const double odd = 2.0 * n + 1.0;
        const cplx u = odd * v;
        const cplx s = std::sin(u);
        const cplx c = std::cos(u);
        const cplx cyc[4] = {s, c, -s, -c};
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        bool all_small = true;
        double oddpow = 1.0;
        for (int m = 0; m < 6; ++m) {
            const cplx term = sign * base * oddpow * cyc[m % 4];
            out[m] += term;
            if (std::abs(term) > kSeriesEps * (std::abs(out[m]) + kTiny))
                all_small = false;
            oddpow *= odd;
        }
        if (all_small) {
            if (++streak >= 2) return;
        } else {
            streak = 0;
        }
    }
    throw convergence_error("theta series did not converge");
}

ReducedArgument Lattice::reduce(cplx x) const {
    const double a = omega_.real(), b = omega_.imag();
    const double c = omega_prime_.real(), d = omega_prime_.imag();
    const double det = 4.0 * (a * d - b * c);
    const double alpha = (x.real() * 2.0 * d - x.imag() * 2.0 * c) / det;
    const double beta = (2.0 * a * x.imag() - 2.0 * b * x.real()) / det;
    ReducedArgument r;
    r.m = std::llround(alpha);
    r.m_prime = std::llround(beta);
    r.x_reduced = x - 2.0 * static_cast<double>(r.m) * omega_
                    - 2.0 * static_cast<double>(r.m_prime) * omega_prime_;
    const cplx ipi(0.0, std::acos(-1.0));
    const cplx mz = static_cast<double>(r.m);
    const cplx mpz = static_cast<double>(r.m_prime);
    r.log_quasi_factor =
        (2.0 * mz * eta1_ + 2.0 * mpz * eta2_) *
            (r.x_reduced + mz * omega_ + mpz * omega_prime_) +
        ipi * (mz + mpz + mz * mpz);
    return r;
}

double Lattice::pole_distance(cplx x) const {
    const cplx xr = reduce(x).x_reduced;
    const cplx w1 = 2.0 * omega_, w2 = 2.0 * omega_prime_;
    double best = std::abs(xr);
    const cplx shifts[8] = {w1, -w1, w2, -w2, w1 + w2, -(w1 + w2), w1 - w2, w2 - w1};
    for (const cplx& s : shifts) best = std::min(best, std::abs(xr - s));
    return best;
}

cplx Lattice::sigma(cplx x) const {
    const ReducedArgument r = reduce(x);
    const double pi = std::acos(-1.0);
    const cplx k = pi / (2.0 * omega_);
    cplx th[6];
    theta1_derivs(k * r.x_reduced, th);
    const cplx sig_red = (2.0 * omega_ / pi) *
                         std::exp(eta1_ * r.x_reduced * r.x_reduced / (2.0 * omega_)) *
                         th[0] / theta1_prime0_;
    return std::exp(r.log_quasi_factor) * sig_red;
}

cplx Lattice::log_sigma(cplx x) const {
    const ReducedArgument r = reduce(x);
    if (pole_distance(x) < pole_tol)
        throw pole_error("log_sigma: argument reduces to a lattice point");
    const double pi = std::acos(-1.0);
    const cplx k = pi / (2.0 * omega_);
    cplx th[6];
    theta1_derivs(k * r.x_reduced, th);
    const cplx sig_red = (2.0 * omega_ / pi) *
                         std::exp(eta1_ * r.x_reduced * r.x_reduced / (2.0 * omega_)) *
                         th[0] / theta1_prime0_;
    return r.log_quasi_factor + std::log(sig_red);
}

cplx Lattice::zeta(cplx x) const {
    const ReducedArgument r = reduce(x);
    if (pole_distance(x) < pole_tol)
        throw pole_error("zeta: argument reduces to a lattice point");
    const double pi = std::acos(-1.0);
    const cplx k = pi / (2.0 * omega_);
    cplx th[6];
    theta1_derivs(k * r.x_reduced, th);
    return eta1_ * r.x_reduced / omega_ + k * th[1] / th[0] +
           2.0 * static_cast<double>(r.m) * eta1_ +
           2.0 * static_cast<double>(r.m_prime) * eta2_;
}

cplx Lattice::wp(cplx x, int order) const {
    if (order < 0 || order > 3)
        throw config_error("wp: order must be 0, 1, 2 or 3");
    const ReducedArgument red = reduce(x);
    if (pole_distance(x) < pole_tol)
        throw pole_error("wp: argument reduces to a lattice point");
    const double pi = std::acos(-1.0);
    const cplx k = pi / (2.0 * omega_);
    cplx th[6];
    theta1_derivs(k * red.x_reduced, th);
    const cplx r1 = th[1] / th[0];
    const cplx r2 = th[2] / th[0];
    const cplx r3 = th[3] / th[0];
    const cplx r4 = th[4] / th[0];
    const cplx r5 = th[5] / th[0];
    switch (order) {
    case 0: {
        const cplx s1 = r2 - r1 * r1;
        return -eta1_ / omega_ - k * k * s1;
    }
    case 1: {
        const cplx s2 = r3 - 3.0 * r1 * r2 + 2.0 * r1 * r1 * r1;
        return -k * k * k * s2;
    }
    case 2: {
        const cplx s3 = r4 - 4.0 * r1 * r3 - 3.0 * r2 * r2 +
                        12.0 * r1 * r1 * r2 - 6.0 * r1 * r1 * r1 * r1;
        return -k * k * k * k * s3;
    }
    default: {
        const cplx s4 = r5 - 5.0 * r1 * r4 - 10.0 * r2 * r3 +
                        20.0 * r1 * r1 * r3 + 30.0 * r1 * r2 * r2 -
                        60.0 * r1 * r1 * r1 * r2 +
                        24.0 * r1 * r1 * r1 * r1 * r1;
        return -k * k * k * k * k * s4;
    }
    }
}

} // namespace ellab

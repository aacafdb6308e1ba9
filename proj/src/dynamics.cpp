#include "ellab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ellab {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Fifth-order weights minus the embedded fourth-order weights.
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                 e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                 e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

using Vec = std::vector<cplx>;

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
    Vec out = y;
    for (const auto& [coef, k] : terms) {
        if (coef == 0.0) continue;
        for (size_t i = 0; i < out.size(); ++i) out[i] += h * coef * (*k)[i];
    }
    return out;
}

} // namespace

Trajectory integrate(const Rhs& rhs, std::vector<cplx> y0, double t0,
                     double t_end, const IntegrateOptions& opt) {
    if (!(t_end > t0)) throw config_error("integrate: t_end must exceed t0");
    if (!(opt.rel_tol > 0) || !(opt.abs_tol > 0))
        throw config_error("integrate: tolerances must be positive");

    Trajectory traj;
    traj.t.push_back(t0);
    traj.y.push_back(y0);

    double t = t0;
    Vec y = std::move(y0);
    Vec k1 = rhs(t, y);

    double h = opt.h_init;
    if (h <= 0) {
        // Crude starting guess from the size of the initial derivative.
        double ny = 0, nf = 0;
        for (size_t i = 0; i < y.size(); ++i) {
            ny = std::max(ny, std::abs(y[i]));
            nf = std::max(nf, std::abs(k1[i]));
        }
        h = 0.01 * (ny + 1.0) / (nf + 1.0);
        h = std::min(h, (t_end - t0) / 10.0);
    }

    // PI controller state.
    double prev_err = 1.0;
    const double alpha = 0.7 / 5.0, beta = 0.08;

    const bool fixed = opt.h_fixed > 0;
    // Stop once the remaining interval is at roundoff scale; otherwise a
    // residue of a few ulp left by accumulated steps would be mistaken
    // for a step-size underflow.
    const double span_eps = 4.0 * std::numeric_limits<double>::epsilon() *
                            std::max({std::abs(t0), std::abs(t_end), t_end - t0});
    while (t_end - t > span_eps) {
        h = std::min(fixed ? opt.h_fixed : h, t_end - t);
        if (h < opt.h_min)
            throw convergence_error("integrate: step size underflow");

        const Vec y2 = axpy(y, h, {{a21, &k1}});
        const Vec k2 = rhs(t + c2 * h, y2);
        const Vec y3 = axpy(y, h, {{a31, &k1}, {a32, &k2}});
        const Vec k3 = rhs(t + c3 * h, y3);
        const Vec y4 = axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
        const Vec k4 = rhs(t + c4 * h, y4);
        const Vec y5 = axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
        const Vec k5 = rhs(t + c5 * h, y5);
        const Vec y6 = axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        const Vec k6 = rhs(t + h, y6);
        const Vec ynew = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const Vec k7 = rhs(t + h, ynew);

        double err = 0;
        for (size_t i = 0; i < y.size(); ++i) {
            const cplx de = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                 e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opt.abs_tol +
                              opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double q = std::abs(de) / sc;
            err += q * q;
        }
        err = std::sqrt(err / static_cast<double>(y.size()));
        if (!fixed && !std::isfinite(err)) {
            // A non-finite stage blew up the estimate; retreat hard so
            // the step either recovers or underflows cleanly.
            ++traj.rejected_steps;
            h *= 0.2;
            continue;
        }

        if (fixed || err <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;
            if (opt.guard) opt.guard(t, y);
            traj.t.push_back(t);
            traj.y.push_back(y);
            if (fixed) continue;
            const double safe_err = std::max(err, 1e-10);
            double fac = 0.8 * std::pow(safe_err, -alpha) * std::pow(prev_err, beta);
            fac = std::clamp(fac, 0.2, 5.0);
            prev_err = safe_err;
            h *= fac;
        } else {
            ++traj.rejected_steps;
            double fac = 0.8 * std::pow(err, -alpha);
            fac = std::clamp(fac, 0.2, 1.0);
            h *= fac;
        }
    }
    return traj;
}

DriftReport monitor(const Trajectory& traj, const std::vector<Invariant>& invariants) {
    DriftReport rep;
    if (traj.t.empty()) return rep;
    for (const auto& [name, fn] : invariants) {
        DriftRow row;
        row.name = name;
        row.first = fn(traj.t.front(), traj.y.front());
        const double scale = std::max(std::abs(row.first), 1e-300);
        for (size_t i = 1; i < traj.t.size(); ++i) {
            const double d = std::abs(fn(traj.t[i], traj.y[i]) - row.first);
            row.max_abs_drift = std::max(row.max_abs_drift, d);
        }
        row.max_rel_drift = row.max_abs_drift / scale;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

} // namespace ellab

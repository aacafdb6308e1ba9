#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "ellab/errors.hpp"

namespace ellab {

using cplx = std::complex<double>;

using Rhs = std::function<std::vector<cplx>(double, const std::vector<cplx>&)>;

// Called on every accepted step; throw (typically collision_error) to
// abort the integration before a bad state is recorded.
using StepGuard = std::function<void(double, const std::vector<cplx>&)>;

struct IntegrateOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_init = 0;      // 0 means choose automatically
    double h_min = 1e-12;
    double h_fixed = 0;     // > 0 disables adaptivity and forces this step
    StepGuard guard;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<std::vector<cplx>> y;
    long long rejected_steps = 0;
};

// Embedded fifth(fourth)-order Runge-Kutta pair with PI step-size
// control.  Every accepted step is recorded.  Throws convergence_error
// if the step size underflows h_min.
Trajectory integrate(const Rhs& rhs, std::vector<cplx> y0, double t0,
                     double t_end, const IntegrateOptions& opt = {});

using Invariant =
    std::pair<std::string, std::function<cplx(double, const std::vector<cplx>&)>>;

struct DriftRow {
    std::string name;
    cplx first;
    double max_abs_drift = 0;
    double max_rel_drift = 0;
};

struct DriftReport {
    std::vector<DriftRow> rows;
};

// Evaluate each named invariant along the trajectory and report the
// worst absolute and relative deviation from its initial value.
DriftReport monitor(const Trajectory& traj, const std::vector<Invariant>& invariants);

} // namespace ellab

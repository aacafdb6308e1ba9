#include "runners.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ellab/bkp.hpp"
#include "ellab/cm.hpp"
#include "ellab/dynamics.hpp"
#include "ellab/identities.hpp"
#include "ellab/random.hpp"
#include "ellab/rs.hpp"
#include "ellab/version.hpp"

namespace ellab::cli {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------- output

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw config_error("cannot create output directory \"" + dir + "\"");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json jc(cplx v) { return json::array({v.real(), v.imag()}); }

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
    ensure_dir(dir);
    const std::filesystem::path p = std::filesystem::path(dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw config_error("cannot write \"" + p.string() + "\"");
    out << content;
}

// ---------------------------------------------------------------- checks

struct CheckResult {
    double value = 0;
    double tolerance = 0;
    bool pass = false;
};

// Named pass/fail results of one run.  The scenario's tol_override,
// when present, replaces every default tolerance; the scenario's
// check list, when non-empty, selects which results count.
class CheckSet {
public:
    explicit CheckSet(const Scenario& sc) : sc_(sc) {}

    void add(const std::string& name, double value, double default_tol) {
        const double tol = sc_.tol_override.value_or(default_tol);
        results_[name] = CheckResult{value, tol, value <= tol};
    }

    json finish(bool& all_pass) const {
        std::map<std::string, CheckResult> selected;
        if (sc_.checks.empty()) {
            selected = results_;
        } else {
            for (const auto& name : sc_.checks) {
                auto it = results_.find(name);
                if (it == results_.end())
                    throw config_error(
                        "config key \"checks\": unknown check \"" + name + "\"");
                selected.insert(*it);
            }
        }
        json out = json::object();
        all_pass = true;
        for (const auto& [name, r] : selected) {
            out[name] = {{"pass", r.pass},
                         {"tolerance", r.tolerance},
                         {"value", r.value}};
            all_pass = all_pass && r.pass;
        }
        return out;
    }

private:
    const Scenario& sc_;
    std::map<std::string, CheckResult> results_;
};

int write_report(const Scenario& sc, const std::string& subcommand,
                 const std::string& out_dir, const CheckSet& checks,
                 const json& extra) {
    bool pass = true;
    const json body = checks.finish(pass);
    json report;
    report["checks"] = body;
    report["config_digest"] = config_digest(sc);
    report["pass"] = pass;
    report["seed"] = sc.seed;
    report["subcommand"] = subcommand;
    report["system"] = sc.system;
    report["version"] = library_version;
    for (const auto& [k, v] : extra.items()) report[k] = v;
    write_file(out_dir, "report.json", report.dump(2) + "\n");
    return pass ? 0 : 1;
}

// ------------------------------------------------------- initial states

Lattice make_lattice(const Scenario& sc) {
    return Lattice(sc.omega, sc.omega_prime);
}

// Differences that must stay clear of the lattice for every pair of
// drawn points.  The shift-coupled systems additionally forbid
// differences landing on +-eta.
std::vector<cplx> pair_shifts(const Scenario& sc) {
    if (sc.system == "toda-rs" || sc.system == "selfdual-rs")
        return {cplx(0.0), sc.eta, -sc.eta};
    return {cplx(0.0)};
}

double velocity_floor(const Scenario& sc) {
    if (sc.system == "nv") return 0.1;
    if (sc.system == "toda-rs" || sc.system == "selfdual-rs") return 1e-3;
    return 0.0;
}

bool clears_margins(const Lattice& lat, cplx cand,
                    const std::vector<cplx>& placed,
                    const std::vector<cplx>& shifts, double margin) {
    for (cplx q : placed)
        for (cplx s : shifts)
            if (lat.pole_distance(cand - q + s) < margin ||
                lat.pole_distance(q - cand + s) < margin)
                return false;
    return true;
}

std::vector<cplx> draw_points(Rng& rng, const Lattice& lat, int n,
                              const std::vector<cplx>& shifts, double margin) {
    std::vector<cplx> pts;
    pts.reserve(n);
    while (static_cast<int>(pts.size()) < n) {
        bool placed = false;
        for (int attempt = 0; attempt < 5000 && !placed; ++attempt) {
            const cplx cand = rng.cell_point(lat);
            if (clears_margins(lat, cand, pts, shifts, margin)) {
                pts.push_back(cand);
                placed = true;
            }
        }
        if (!placed)
            throw convergence_error(
                "could not place distinct particles in the period cell");
    }
    return pts;
}

std::vector<cplx> resolve_positions(const Scenario& sc, const Lattice& lat,
                                    Rng& rng, int count,
                                    double margin_factor = 0.05) {
    if (!sc.positions.empty()) {
        if (static_cast<int>(sc.positions.size()) != count)
            throw config_error("config key \"initial.positions\" must hold " +
                               std::to_string(count) +
                               " entries for this scenario");
        try {
            check_distinct(lat, sc.positions);
        } catch (const collision_error& e) {
            throw config_error(std::string("initial positions collide: ") +
                               e.what());
        }
        return sc.positions;
    }
    return draw_points(rng, lat, count, pair_shifts(sc),
                       margin_factor * lat.cell_scale());
}

std::vector<cplx> resolve_velocities(const Scenario& sc, Rng& rng, int count) {
    if (!sc.velocities.empty()) {
        if (static_cast<int>(sc.velocities.size()) != count)
            throw config_error("config key \"initial.velocities\" must hold " +
                               std::to_string(count) +
                               " entries for this scenario");
        return sc.velocities;
    }
    const double floor = velocity_floor(sc);
    std::vector<cplx> v(count);
    for (auto& w : v) {
        do {
            w = rng.unit_disk();
        } while (std::abs(w) < floor);
    }
    return v;
}

// --------------------------------------------------------- trajectories

ManyBodyState unpack_state(double t, const std::vector<cplx>& y, int n) {
    ManyBodyState s;
    s.t = t;
    s.x.assign(y.begin(), y.begin() + n);
    s.v.assign(y.begin() + n, y.begin() + 2 * n);
    return s;
}

Trajectory run_flow(const Scenario& sc, const Rhs& rhs,
                    const std::vector<cplx>& y0) {
    IntegrateOptions opt;
    opt.rel_tol = sc.time.rel_tol;
    opt.abs_tol = sc.time.abs_tol;
    return integrate(rhs, y0, 0.0, sc.time.t_end, opt);
}

struct InvariantTable {
    std::vector<std::string> names;
    std::vector<std::vector<cplx>> rows; // rows[sample][column]
};

InvariantTable scan_invariants(const Trajectory& traj,
                               const std::vector<Invariant>& invs) {
    InvariantTable table;
    for (const auto& inv : invs) table.names.push_back(inv.first);
    table.rows.reserve(traj.t.size());
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        std::vector<cplx> row;
        row.reserve(invs.size());
        for (const auto& inv : invs)
            row.push_back(inv.second(traj.t[i], traj.y[i]));
        table.rows.push_back(std::move(row));
    }
    return table;
}

// Worst drift from the initial value over the column range [lo, hi),
// relative to max(1, |initial value|).
double max_rel_drift(const InvariantTable& t, std::size_t lo, std::size_t hi) {
    double worst = 0;
    for (std::size_t k = lo; k < hi; ++k) {
        const cplx first = t.rows.front()[k];
        const double scale = std::max(1.0, std::abs(first));
        for (const auto& row : t.rows)
            worst = std::max(worst, std::abs(row[k] - first) / scale);
    }
    return worst;
}

double max_abs_value(const InvariantTable& t, std::size_t k) {
    double worst = 0;
    for (const auto& row : t.rows)
        worst = std::max(worst, std::abs(row[k]));
    return worst;
}

std::string trajectory_csv(const Trajectory& traj,
                           const std::vector<std::string>& coord_names,
                           const InvariantTable& table) {
    std::string out = "t";
    for (const auto& c : coord_names) out += "," + c + "_re," + c + "_im";
    for (const auto& nm : table.names) out += "," + nm + "_re," + nm + "_im";
    out += "\n";
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        out += fmt17(traj.t[i]);
        for (std::size_t k = 0; k < coord_names.size(); ++k) {
            out += ",";
            out += fmt17(traj.y[i][k].real());
            out += ",";
            out += fmt17(traj.y[i][k].imag());
        }
        if (!table.rows.empty())
            for (const cplx v : table.rows[i]) {
                out += ",";
                out += fmt17(v.real());
                out += ",";
                out += fmt17(v.imag());
            }
        out += "\n";
    }
    return out;
}

std::vector<std::string> second_order_coord_names(int n) {
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) names.push_back("xdot" + std::to_string(i));
    return names;
}

std::vector<std::string> two_family_coord_names(int n) {
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) names.push_back("y" + std::to_string(i));
    return names;
}

json trajectory_extra(const Scenario& sc, const Trajectory& traj) {
    json extra;
    extra["rejected_steps"] = traj.rejected_steps;
    extra["samples"] = traj.t.size();
    extra["t_end"] = sc.time.t_end;
    extra["trajectory"] = "trajectory.csv";
    return extra;
}

cplx nearest_root(const std::vector<cplx>& roots, cplx target) {
    if (roots.empty())
        throw convergence_error("the spectral curve produced no roots");
    cplx best = roots.front();
    for (cplx r : roots)
        if (std::abs(r - target) < std::abs(best - target)) best = r;
    return best;
}

} // namespace

// -------------------------------------------------------------- runners

int run_verify_identities(const Scenario& sc, const std::string& out_dir) {
    const Lattice lat = make_lattice(sc);
    const auto rows = identity_suite(lat, sc.trials, sc.seed);
    CheckSet checks(sc);
    for (const auto& row : rows)
        checks.add(row.name, row.max_rel_residual, 1e-10);
    json extra;
    extra["trials"] = sc.trials;
    return write_report(sc, "verify-identities", out_dir, checks, extra);
}

int run_simulate(const Scenario& sc, const std::string& out_dir) {
    const Lattice lat = make_lattice(sc);
    Rng rng(sc.seed);
    const int n = sc.particles;

    ManyBodyState s0;
    s0.x = resolve_positions(sc, lat, rng, n);
    s0.v = resolve_velocities(sc, rng, n);
    std::vector<cplx> y0(s0.x);
    y0.insert(y0.end(), s0.v.begin(), s0.v.end());

    Rhs rhs;
    std::vector<Invariant> invariants;
    CheckSet checks(sc);
    const cplx lam = sc.lambda;

    if (sc.system == "cm-kp") {
        const CMParams p{lat, sc.hbar, sc.c, sc.b, lam};
        rhs = [p, n](double t, const std::vector<cplx>& y) {
            const ManyBodyState s = unpack_state(t, y, n);
            const std::vector<cplx> a = accel_t2(s, p);
            std::vector<cplx> dy(y.begin() + n, y.end());
            dy.insert(dy.end(), a.begin(), a.end());
            return dy;
        };
        auto hcache =
            std::make_shared<std::pair<const void*, CMHamiltonians>>();
        auto ham = [p, n, lam, hcache](double t, const std::vector<cplx>& y) {
            if (hcache->first != static_cast<const void*>(&y)) {
                hcache->second = hamiltonians(unpack_state(t, y, n), p, lam);
                hcache->first = &y;
            }
            return hcache->second;
        };
        invariants.emplace_back("h1", [ham](double t, const std::vector<cplx>& y) {
            return ham(t, y).h1;
        });
        invariants.emplace_back("h2", [ham](double t, const std::vector<cplx>& y) {
            return ham(t, y).h2;
        });
        invariants.emplace_back("h3", [ham](double t, const std::vector<cplx>& y) {
            return ham(t, y).h3;
        });
        auto ccache = std::make_shared<std::pair<const void*, PolyInZ>>();
        auto curve = [p, n, lam, ccache](double t, const std::vector<cplx>& y) {
            if (ccache->first != static_cast<const void*>(&y)) {
                ccache->second = spectral_curve(unpack_state(t, y, n), p, lam);
                ccache->first = &y;
            }
            return ccache->second;
        };
        for (int k = 0; k <= n; ++k)
            invariants.emplace_back(
                "curve_c" + std::to_string(k),
                [curve, k](double t, const std::vector<cplx>& y) {
                    const PolyInZ& poly = curve(t, y);
                    return k < static_cast<int>(poly.c.size()) ? poly.c[k]
                                                               : cplx(0.0);
                });
        const Trajectory traj = run_flow(sc, rhs, y0);
        const InvariantTable table = scan_invariants(traj, invariants);
        checks.add("hamiltonian_drift", max_rel_drift(table, 0, 3), 1e-8);
        checks.add("curve_drift", max_rel_drift(table, 3, table.names.size()),
                   1e-6);
        write_file(out_dir, "trajectory.csv",
                   trajectory_csv(traj, second_order_coord_names(n), table));
        return write_report(sc, "simulate", out_dir, checks,
                            trajectory_extra(sc, traj));
    }

    if (sc.system == "bkp") {
        rhs = [lat, n](double t, const std::vector<cplx>& y) {
            const ManyBodyState s = unpack_state(t, y, n);
            const std::vector<cplx> a = accel_bkp(s, lat);
            std::vector<cplx> dy(y.begin() + n, y.end());
            dy.insert(dy.end(), a.begin(), a.end());
            return dy;
        };
        auto icache = std::make_shared<std::pair<const void*, BKPIntegrals>>();
        auto ints = [lat, n, icache](double t, const std::vector<cplx>& y) {
            if (icache->first != static_cast<const void*>(&y)) {
                icache->second = integrals_bkp(unpack_state(t, y, n), lat);
                icache->first = &y;
            }
            return icache->second;
        };
        invariants.emplace_back("i1", [ints](double t, const std::vector<cplx>& y) {
            return ints(t, y).i1;
        });
        invariants.emplace_back("i2", [ints](double t, const std::vector<cplx>& y) {
            return ints(t, y).i2;
        });
        invariants.emplace_back("j", [ints](double t, const std::vector<cplx>& y) {
            return ints(t, y).j;
        });
        if (n == 3)
            invariants.emplace_back(
                "i3", [ints](double t, const std::vector<cplx>& y) {
                    return *ints(t, y).i3;
                });
        const std::size_t n_ints = invariants.size();
        const std::array<std::pair<cplx, cplx>, 3> probes = {{
            {sc.z, lam},
            {sc.z + cplx(0.13, -0.21), lam + cplx(0.07, -0.04)},
            {sc.z - cplx(0.22, 0.05), lam + cplx(-0.06, 0.09)},
        }};
        for (std::size_t k = 0; k < probes.size(); ++k) {
            const cplx zz = probes[k].first;
            const cplx ll = probes[k].second;
            invariants.emplace_back(
                "curve_v" + std::to_string(k),
                [lat, n, zz, ll](double t, const std::vector<cplx>& y) {
                    return curve_value_bkp(unpack_state(t, y, n), lat, zz, ll);
                });
        }
        const Trajectory traj = run_flow(sc, rhs, y0);
        const InvariantTable table = scan_invariants(traj, invariants);
        checks.add("integral_drift", max_rel_drift(table, 0, n_ints), 1e-8);
        checks.add("curve_drift",
                   max_rel_drift(table, n_ints, table.names.size()), 1e-6);
        write_file(out_dir, "trajectory.csv",
                   trajectory_csv(traj, second_order_coord_names(n), table));
        return write_report(sc, "simulate", out_dir, checks,
                            trajectory_extra(sc, traj));
    }

    if (sc.system == "nv") {
        const NVParams p{lat, sc.gamma, lam};
        rhs = [p, n](double t, const std::vector<cplx>& y) {
            const ManyBodyState s = unpack_state(t, y, n);
            const std::vector<cplx> a = nv_accel(s, p);
            std::vector<cplx> dy(y.begin() + n, y.end());
            dy.insert(dy.end(), a.begin(), a.end());
            return dy;
        };
        const cplx zz = sc.z;
        invariants.emplace_back(
            "manakov", [p, n, zz, lam](double t, const std::vector<cplx>& y) {
                const ManyBodyState s = unpack_state(t, y, n);
                return cplx(nv_manakov_residual(s, p, zz, lam).max_abs(), 0.0);
            });
        const Trajectory traj = run_flow(sc, rhs, y0);
        const InvariantTable table = scan_invariants(traj, invariants);
        checks.add("manakov_residual", max_abs_value(table, 0), 1e-9);
        write_file(out_dir, "trajectory.csv",
                   trajectory_csv(traj, second_order_coord_names(n), table));
        return write_report(sc, "simulate", out_dir, checks,
                            trajectory_extra(sc, traj));
    }

    if (sc.system == "toda-rs") {
        const RSParams p{lat, sc.eta, lam, sc.c, sc.r};
        rhs = [p, n](double t, const std::vector<cplx>& y) {
            const ManyBodyState s = unpack_state(t, y, n);
            const std::vector<cplx> a = accel_rs(s, p);
            std::vector<cplx> dy(y.begin() + n, y.end());
            dy.insert(dy.end(), a.begin(), a.end());
            return dy;
        };
        auto hcache =
            std::make_shared<std::pair<const void*, RSHamiltonians>>();
        auto ham = [p, n, lam, hcache](double t, const std::vector<cplx>& y) {
            if (hcache->first != static_cast<const void*>(&y)) {
                hcache->second = hamiltonians_rs(unpack_state(t, y, n), p, lam);
                hcache->first = &y;
            }
            return hcache->second;
        };
        invariants.emplace_back("h_plus",
                                [ham](double t, const std::vector<cplx>& y) {
                                    return ham(t, y).h_plus;
                                });
        invariants.emplace_back("h_minus",
                                [ham](double t, const std::vector<cplx>& y) {
                                    return ham(t, y).h_minus;
                                });
        invariants.emplace_back("trace_ratio",
                                [ham](double t, const std::vector<cplx>& y) {
                                    const RSHamiltonians h = ham(t, y);
                                    return h.trace_l / h.h_plus;
                                });
        const Trajectory traj = run_flow(sc, rhs, y0);
        const InvariantTable table = scan_invariants(traj, invariants);
        checks.add("hamiltonian_drift", max_rel_drift(table, 0, 2), 1e-8);
        checks.add("trace_ratio_drift", max_rel_drift(table, 2, 3), 1e-8);
        write_file(out_dir, "trajectory.csv",
                   trajectory_csv(traj, second_order_coord_names(n), table));
        return write_report(sc, "simulate", out_dir, checks,
                            trajectory_extra(sc, traj));
    }

    throw config_error("config key \"system\": \"" + sc.system +
                       "\" is not a second-order flow; use the selfdual "
                       "subcommand for the self-dual systems");
}

int run_spectral_curve(const Scenario& sc, const std::string& out_dir) {
    const Lattice lat = make_lattice(sc);
    Rng rng(sc.seed);
    const int n = sc.particles;
    ManyBodyState s;
    s.x = resolve_positions(sc, lat, rng, n);
    s.v = resolve_velocities(sc, rng, n);

    PolyInZ poly;
    if (sc.system == "cm-kp") {
        const CMParams p{lat, sc.hbar, sc.c, sc.b, sc.lambda};
        poly = spectral_curve(s, p, sc.lambda);
    } else if (sc.system == "bkp") {
        poly = spectral_curve_bkp(s, lat, sc.lambda);
    } else {
        throw config_error(
            "config key \"system\": spectral-curve supports \"cm-kp\" and "
            "\"bkp\"");
    }

    const std::vector<cplx> roots = poly_roots(poly);
    json extra;
    extra["degree"] = poly.degree();
    json coeffs = json::array();
    for (cplx cv : poly.c) coeffs.push_back(jc(cv));
    extra["coefficients"] = coeffs;
    json jroots = json::array();
    for (cplx rt : roots) jroots.push_back(jc(rt));
    extra["roots"] = jroots;

    double coeff_scale = 1.0;
    for (cplx cv : poly.c) coeff_scale = std::max(coeff_scale, std::abs(cv));
    double worst = 0;
    for (cplx rt : roots) {
        const double local =
            coeff_scale * std::pow(std::max(1.0, std::abs(rt)),
                                   static_cast<double>(poly.degree()));
        worst = std::max(worst, std::abs(poly.eval(rt)) / local);
    }
    CheckSet checks(sc);
    checks.add("root_residual", worst, 1e-8);
    return write_report(sc, "spectral-curve", out_dir, checks, extra);
}

int run_selfdual(const Scenario& sc, const std::string& out_dir) {
    const Lattice lat = make_lattice(sc);
    Rng rng(sc.seed);
    const int n = sc.particles;
    const bool is_cm = sc.system == "selfdual-cm";
    const bool is_bkp = sc.system == "selfdual-bkp";
    const bool is_rs = sc.system == "selfdual-rs";
    if (!is_cm && !is_bkp && !is_rs)
        throw config_error(
            "config key \"system\": selfdual supports \"selfdual-cm\", "
            "\"selfdual-bkp\" and \"selfdual-rs\"");

    // The two families are stored interleaved as one 2N-point cloud
    // with all cross margins enforced, then split.  The margin is
    // wider than for the flows with explicit collision handling: the
    // second-difference check below amplifies high derivatives of the
    // trajectory, which grow steeply as points approach.
    const std::vector<cplx> cloud =
        resolve_positions(sc, lat, rng, 2 * n, is_bkp ? 0.18 : 0.15);
    std::vector<cplx> y0(cloud);

    const cplx mu = sc.mu;
    const cplx eta = sc.eta;
    Rhs rhs = [&, n](double, const std::vector<cplx>& yv) {
        const std::vector<cplx> xs(yv.begin(), yv.begin() + n);
        const std::vector<cplx> ys(yv.begin() + n, yv.end());
        std::vector<cplx> dx, dy;
        if (is_cm) selfdual_rhs(lat, xs, ys, mu, dx, dy);
        else if (is_bkp) selfdual_rhs_bkp(lat, xs, ys, mu, dx, dy);
        else selfdual_rhs_rs(lat, xs, ys, mu, eta, dx, dy);
        std::vector<cplx> out(std::move(dx));
        out.insert(out.end(), dy.begin(), dy.end());
        return out;
    };

    // Short probe legs for the second-difference consistency check.
    // Each leg is far below the step the tolerance allows, so the
    // stepper resolves it in a single near-exact step and the
    // endpoint error stays below the differencing noise floor.  The
    // spacing balances truncation (grows as h^4 after extrapolation)
    // against cancellation noise (shrinks as h^-2); the three-body
    // accelerations have much steeper derivatives near coincidence
    // and get a smaller spacing.
    const double h = is_bkp ? 5e-5 : 2e-4;
    IntegrateOptions probe_opt;
    probe_opt.rel_tol = 1e-12;
    probe_opt.abs_tol = 1e-14;
    std::array<std::vector<cplx>, 5> probe;
    probe[0] = y0;
    for (int k = 1; k < 5; ++k) {
        const double t0 = (k - 1) * h / 2;
        const double t1 = k * h / 2;
        probe[k] = integrate(rhs, probe[k - 1], t0, t1, probe_opt).y.back();
    }

    // Richardson-extrapolated central second difference about t = h,
    // compared against the second-order accelerations evaluated on the
    // midpoint state with the flow's own velocities.
    const std::vector<cplx> vmid = rhs(h, probe[2]);
    ManyBodyState mid;
    mid.x.assign(probe[2].begin(), probe[2].begin() + n);
    mid.v.assign(vmid.begin(), vmid.begin() + n);
    std::vector<cplx> expected(n);
    if (is_cm) {
        const CMParams p{lat, cplx(1.0), cplx(0.0), cplx(0.0), sc.lambda};
        expected = accel_t2(mid, p);
    } else if (is_bkp) {
        expected = accel_bkp(mid, lat);
    } else {
        const RSParams p{lat, eta, sc.lambda, sc.c, sc.r};
        expected = accel_rs(mid, p);
    }
    double worst = 0;
    for (int i = 0; i < n; ++i) {
        const cplx d2h = (probe[4][i] - 2.0 * probe[2][i] + probe[0][i]) /
                         (h * h);
        const cplx d2h2 = (probe[3][i] - 2.0 * probe[2][i] + probe[1][i]) /
                          (h * h / 4.0);
        const cplx fd = (4.0 * d2h2 - d2h) / 3.0;
        worst = std::max(worst, std::abs(fd - expected[i]) /
                                    std::max(1.0, std::abs(expected[i])));
    }
    CheckSet checks(sc);
    checks.add("second_order_consistency", worst, is_cm ? 1e-6 : 1e-5);

    const Trajectory traj = run_flow(sc, rhs, y0);
    const InvariantTable empty_table;
    write_file(out_dir, "trajectory.csv",
               trajectory_csv(traj, two_family_coord_names(n), empty_table));
    return write_report(sc, "selfdual", out_dir, checks,
                        trajectory_extra(sc, traj));
}

int run_discrete(const Scenario& sc, const std::string& out_dir) {
    const Lattice lat = make_lattice(sc);
    Rng rng(sc.seed);
    const int n = sc.particles;
    const bool is_cm = sc.system == "cm-kp";
    const bool is_rs = sc.system == "toda-rs";
    if (!is_cm && !is_rs)
        throw config_error(
            "config key \"system\": discrete supports \"cm-kp\" and "
            "\"toda-rs\"");

    std::vector<cplx> x_cur = resolve_positions(sc, lat, rng, n);
    const double dt = sc.time.t_end;

    // The previous slice is synthesized from the velocities, so its
    // cross distances to the current slice are not covered by the
    // position draw.  Check them (including the shifted copies for
    // the relativistic system), and redraw the velocities when they
    // were seeded rather than supplied.
    const std::vector<cplx> shifts = pair_shifts(sc);
    const double margin = 0.02 * lat.cell_scale();
    const auto slices_clear = [&](const std::vector<cplx>& prev) {
        for (int i = 0; i < n; ++i) {
            // The same particle on consecutive slices sits close by
            // construction; it only has to stay strictly off zero.
            if (std::abs(x_cur[i] - prev[i]) < 1e-3 * lat.cell_scale())
                return false;
            for (int j = 0; j < n; ++j)
                for (cplx s : shifts) {
                    if (i == j && s == cplx(0.0)) continue;
                    if (lat.pole_distance(x_cur[i] - prev[j] + s) < margin ||
                        lat.pole_distance(prev[j] - x_cur[i] + s) < margin)
                        return false;
                }
            if (!clears_margins(lat, prev[i],
                                std::vector<cplx>(prev.begin(),
                                                  prev.begin() + i),
                                shifts, margin))
                return false;
        }
        return true;
    };
    std::vector<cplx> v;
    std::vector<cplx> x_prev(n);
    for (int attempt = 0;; ++attempt) {
        v = resolve_velocities(sc, rng, n);
        for (int i = 0; i < n; ++i) x_prev[i] = x_cur[i] - dt * v[i];
        if (slices_clear(x_prev)) break;
        if (!sc.velocities.empty())
            throw config_error(
                "the synthesized previous slice collides (reduce time.t_end "
                "or adjust the initial data)");
        if (attempt >= 200)
            throw convergence_error(
                "could not synthesize a well-separated previous slice");
    }

    std::string csv = "t";
    for (int i = 0; i < n; ++i) {
        csv += ",x" + std::to_string(i) + "_re";
        csv += ",x" + std::to_string(i) + "_im";
    }
    csv += "\n";
    const auto append_row = [&](double t, const std::vector<cplx>& xs) {
        csv += fmt17(t);
        for (cplx xv : xs) {
            csv += ",";
            csv += fmt17(xv.real());
            csv += ",";
            csv += fmt17(xv.imag());
        }
        csv += "\n";
    };
    append_row(-dt, x_prev);
    append_row(0.0, x_cur);

    const double two_pi = 2.0 * std::acos(-1.0);
    double worst = 0;
    for (int step = 0; step < sc.steps; ++step) {
        std::vector<cplx> guess(n);
        for (int i = 0; i < n; ++i) guess[i] = 2.0 * x_cur[i] - x_prev[i];
        const std::vector<cplx> x_next =
            is_cm ? discrete_cm_step(lat, x_prev, x_cur, guess)
                  : discrete_rs_step(lat, sc.eta, x_prev, x_cur, guess);
        const std::vector<cplx> res =
            is_cm ? discrete_cm_residual(lat, x_prev, x_cur, x_next)
                  : discrete_rs_residual(lat, sc.eta, x_prev, x_cur, x_next);
        for (cplx rr : res) {
            if (is_rs)
                rr -= cplx(0.0, two_pi * std::round(rr.imag() / two_pi));
            worst = std::max(worst, std::abs(rr));
        }
        x_prev = x_cur;
        x_cur = x_next;
        append_row((step + 1) * dt, x_cur);
    }

    CheckSet checks(sc);
    checks.add("residual", worst, 1e-10);
    write_file(out_dir, "trajectory.csv", csv);
    json extra;
    extra["dt"] = dt;
    extra["steps"] = sc.steps;
    extra["trajectory"] = "trajectory.csv";
    return write_report(sc, "discrete", out_dir, checks, extra);
}

int run_wave_residual(const Scenario& sc, const std::string& out_dir) {
    const Lattice lat = make_lattice(sc);
    Rng rng(sc.seed);
    const int n = sc.particles;
    ManyBodyState s;
    s.x = resolve_positions(sc, lat, rng, n);
    s.v = resolve_velocities(sc, rng, n);
    const cplx lam = sc.lambda;

    std::vector<cplx> roots;
    cplx z_star;
    std::function<cplx(cplx)> residual_at;
    std::vector<cplx> eval_shifts;

    if (sc.system == "cm-kp") {
        if (std::abs(sc.hbar - cplx(1.0)) > 1e-12)
            throw config_error(
                "config key \"hbar\": wave-residual requires hbar = 1");
        const CMParams p{lat, cplx(1.0), sc.c, sc.b, lam};
        roots = poly_roots(spectral_curve(s, p, lam));
        z_star = nearest_root(roots, sc.z);
        const cplx zs = z_star;
        residual_at = [s, p, zs, lam](cplx xe) {
            return wave_residual_t2(s, p, zs, lam, xe);
        };
        eval_shifts = {cplx(0.0), lam};
    } else if (sc.system == "toda-rs") {
        const RSParams p{lat, sc.eta, lam, sc.c, sc.r};
        const RSLax lax = build_lax_rs(s, p, lam);
        const auto builder = [&lax, n](cplx zz) {
            CMatrix m = zz * CMatrix::identity(n);
            m -= lax.l;
            return m;
        };
        roots = poly_roots(charpoly_in_z(builder, n, circle_nodes(n + 1, 1.5)));
        z_star = nearest_root(roots, sc.z);
        const cplx zs = z_star;
        residual_at = [s, p, zs, lam](cplx xe) {
            return wave_residual_rs(s, p, zs, lam, xe);
        };
        eval_shifts = {cplx(0.0), lam, sc.eta, sc.eta + lam};
    } else {
        throw config_error(
            "config key \"system\": wave-residual supports \"cm-kp\" and "
            "\"toda-rs\"");
    }

    const double margin = 0.05 * lat.cell_scale();
    double worst = 0;
    json points = json::array();
    for (int k = 0; k < 10; ++k) {
        cplx xe;
        bool found = false;
        for (int attempt = 0; attempt < 5000 && !found; ++attempt) {
            xe = rng.cell_point(lat);
            found = clears_margins(lat, xe, s.x, eval_shifts, margin);
        }
        if (!found)
            throw convergence_error(
                "could not place an evaluation point away from the poles");
        const double rv = std::abs(residual_at(xe));
        worst = std::max(worst, rv);
        points.push_back({{"residual", rv}, {"x", jc(xe)}});
    }

    CheckSet checks(sc);
    checks.add("wave_residual", worst, 1e-9);
    json extra;
    extra["points"] = points;
    json jroots = json::array();
    for (cplx rt : roots) jroots.push_back(jc(rt));
    extra["roots"] = jroots;
    extra["z"] = jc(z_star);
    return write_report(sc, "wave-residual", out_dir, checks, extra);
}

} // namespace ellab::cli

#include "ellab/identities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ellab/kernel.hpp"
#include "ellab/random.hpp"

namespace ellab {

namespace {

using Pts = std::vector<cplx>;

// Accumulates an algebraic identity as a signed sum of terms and
// reports the residual relative to the largest term.
struct Accum {
    cplx diff = 0;
    double scale = 0;
    void add(cplx term) {
        diff += term;
        scale = std::max(scale, std::abs(term));
    }
    double rel() const { return std::abs(diff) / std::max(scale, 1e-300); }
};

struct Check {
    const char* name;
    int npts;
    // Emits every argument combination that must stay clear of poles.
    std::function<void(const Pts&, Pts&)> guards;
    std::function<double(const Lattice&, const Pts&)> eval;
};

Pts draw_clear(const Lattice& lat, Rng& rng, const Check& c, double margin) {
    Pts p(static_cast<size_t>(c.npts));
    Pts g;
    for (int attempt = 0; attempt < 2000; ++attempt) {
        for (auto& z : p) z = rng.cell_point(lat);
        g.clear();
        c.guards(p, g);
        bool ok = true;
        for (cplx a : g) {
            if (lat.pole_distance(a) < margin) {
                ok = false;
                break;
            }
        }
        if (ok) return p;
    }
    throw convergence_error(std::string("identity_suite: could not sample ") +
                            c.name + " clear of poles");
}

// Guard emitters shared by several checks.  Points are (x, y, lambda)
// or (x, lambda) tuples; kernel evaluation additionally needs the
// shifted combinations below.
void guards_xyl(const Pts& p, Pts& g) {
    const cplx x = p[0], y = p[1], l = p[2];
    g = {x, y, l, x + l, y + l, x + y, x + y + l};
}

void guards_xl(const Pts& p, Pts& g) {
    const cplx x = p[0], l = p[1];
    g = {x, l, x + l, l - x};
}

void guards_pairwise(const Pts& p, Pts& g) {
    for (size_t i = 0; i < p.size(); ++i)
        for (size_t j = i + 1; j < p.size(); ++j) g.push_back(p[i] - p[j]);
}

// Two families of n points each; all differences within and across
// families must stay off the lattice.
void guards_two_families(const Pts& p, Pts& g) {
    const size_t n = p.size() / 2;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i < j) {
                g.push_back(p[i] - p[j]);
                g.push_back(p[n + i] - p[n + j]);
            }
            g.push_back(p[i] - p[n + j]);
        }
}

double eval_gradient_sum(const Lattice& lat, const Pts& x) {
    const int n = static_cast<int>(x.size());
    Accum a;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            cplx term = lat.wp(x[i] - x[j], 1);
            for (int k = 0; k < n; ++k)
                if (k != i && k != j) term *= lat.wp(x[i] - x[k]);
            a.add(term);
        }
    return a.rel();
}

double eval_cancellation(const Lattice& lat, const Pts& p) {
    const int n = static_cast<int>(p.size() / 2);
    const Pts x(p.begin(), p.begin() + n);
    const Pts y(p.begin() + n, p.end());
    std::vector<cplx> zx(n), zy(n);
    for (int i = 0; i < n; ++i) {
        cplx sx = 0, sy = 0;
        for (int k = 0; k < n; ++k) {
            if (k != i) sx += lat.zeta(x[i] - x[k]);
            sx -= lat.zeta(x[i] - y[k]);
            if (k != i) sy += lat.zeta(y[i] - y[k]);
            sy -= lat.zeta(y[i] - x[k]);
        }
        zx[i] = sx;
        zy[i] = sy;
    }
    double worst = 0;
    for (int i = 0; i < n; ++i) {
        Accum a;
        for (int j = 0; j < n; ++j) {
            if (j != i) {
                a.add(-(zx[i] - zx[j]) * lat.wp(x[i] - x[j]));
                a.add(-lat.wp(x[i] - x[j], 1));
            }
            a.add((zx[i] + zy[j]) * lat.wp(x[i] - y[j]));
        }
        worst = std::max(worst, a.rel());
    }
    return worst;
}

std::vector<Check> make_checks() {
    std::vector<Check> cs;

    cs.push_back({"kernel_addition_wronskian", 3, guards_xyl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], y = p[1], l = p[2];
                      Accum a;
                      a.add(phi(lat, x, l) * phi(lat, y, l, 1));
                      a.add(-phi(lat, y, l) * phi(lat, x, l, 1));
                      a.add(-phi(lat, x + y, l) * (lat.wp(x) - lat.wp(y)));
                      return a.rel();
                  }});

    cs.push_back({"kernel_addition_product", 3, guards_xyl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], y = p[1], l = p[2];
                      Accum a;
                      a.add(phi(lat, x, l) * phi(lat, y, l));
                      a.add(-phi(lat, x + y, l) *
                            (lat.zeta(x) + lat.zeta(y) - lat.zeta(x + y + l) +
                             lat.zeta(l)));
                      return a.rel();
                  }});

    cs.push_back({"kernel_reflection_wronskian", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      Accum a;
                      a.add(phi(lat, x, l) * phi(lat, -x, l, 1));
                      a.add(-phi(lat, -x, l) * phi(lat, x, l, 1));
                      a.add(-lat.wp(x, 1));
                      return a.rel();
                  }});

    cs.push_back({"kernel_second_addition_wronskian", 3, guards_xyl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], y = p[1], l = p[2];
                      Accum a;
                      a.add(phi(lat, x, l) * phi(lat, y, l, 2));
                      a.add(-phi(lat, y, l) * phi(lat, x, l, 2));
                      a.add(-2.0 * phi(lat, x + y, l, 1) * (lat.wp(x) - lat.wp(y)));
                      a.add(-phi(lat, x + y, l) * (lat.wp(x, 1) - lat.wp(y, 1)));
                      return a.rel();
                  }});

    cs.push_back({"kernel_mixed_addition_wronskian", 3, guards_xyl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], y = p[1], l = p[2];
                      Accum a;
                      a.add(phi(lat, x, l, 1) * phi(lat, y, l, 2));
                      a.add(-phi(lat, y, l, 1) * phi(lat, x, l, 2));
                      a.add(-phi(lat, x + y, l, 2) * (lat.wp(x) - lat.wp(y)));
                      a.add(-phi(lat, x + y, l, 1) * (lat.wp(x, 1) - lat.wp(y, 1)));
                      return a.rel();
                  }});

    cs.push_back({"kernel_even_combination", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      Accum a;
                      a.add(phi(lat, x, l) * phi(lat, -x, l, 2));
                      a.add(-phi(lat, -x, l) * phi(lat, x, l, 2));
                      return a.rel();
                  }});

    cs.push_back({"kernel_mixed_reflection_wronskian", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      Accum a;
                      a.add(phi(lat, x, l, 1) * phi(lat, -x, l, 2));
                      a.add(-phi(lat, -x, l, 1) * phi(lat, x, l, 2));
                      a.add(lat.wp(x, 3) / 6.0);
                      a.add(lat.wp(l) * lat.wp(x, 1));
                      return a.rel();
                  }});

    cs.push_back({"kernel_reflection_product", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      Accum a;
                      a.add(phi(lat, x, l) * phi(lat, -x, l));
                      a.add(-(lat.wp(l) - lat.wp(x)));
                      return a.rel();
                  }});

    cs.push_back({"kernel_reflection_symmetric_sum", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      Accum a;
                      a.add(phi(lat, x, l, 1) * phi(lat, -x, l));
                      a.add(phi(lat, -x, l, 1) * phi(lat, x, l));
                      a.add(-lat.wp(l, 1));
                      return a.rel();
                  }});

    cs.push_back({"kernel_derivative_reflection_product", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      const cplx px = lat.wp(x), pl = lat.wp(l);
                      Accum a;
                      a.add(phi(lat, x, l, 1) * phi(lat, -x, l, 1));
                      a.add(-(px * px + pl * px + pl * pl - lat.g2() / 4.0));
                      return a.rel();
                  }});

    cs.push_back({"kernel_second_reflection_product", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      const cplx px = lat.wp(x), pl = lat.wp(l);
                      Accum a;
                      a.add(phi(lat, x, l) * phi(lat, -x, l, 2));
                      a.add(-(pl * pl + pl * px - 2.0 * px * px));
                      return a.rel();
                  }});

    cs.push_back({"kernel_mixed_reflection_product", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      Accum a;
                      a.add(phi(lat, x, l, 1) * phi(lat, -x, l, 2));
                      a.add(-(lat.wp(l, 1) - lat.wp(x, 1)) *
                            (lat.wp(x) + lat.wp(l) / 2.0));
                      return a.rel();
                  }});

    cs.push_back({"kernel_lame_reduction", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      Accum a;
                      a.add(phi(lat, x, l, 2));
                      a.add(-phi(lat, x, l) * (2.0 * lat.wp(x) + lat.wp(l)));
                      return a.rel();
                  }});

    cs.push_back({"zeta_symmetric_shift", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      Accum a;
                      a.add(2.0 * lat.zeta(l));
                      a.add(-lat.zeta(l + x));
                      a.add(-lat.zeta(l - x));
                      a.add(-lat.wp(l, 1) / (lat.wp(x) - lat.wp(l)));
                      return a.rel();
                  }});

    cs.push_back({"wp_differential_equation", 1,
                  [](const Pts& p, Pts& g) { g = {p[0]}; },
                  [](const Lattice& lat, const Pts& p) {
                      const cplx w = lat.wp(p[0]), w1 = lat.wp(p[0], 1);
                      Accum a;
                      a.add(w1 * w1);
                      a.add(-4.0 * w * w * w);
                      a.add(lat.g2() * w);
                      a.add(lat.g3());
                      return a.rel();
                  }});

    cs.push_back({"wp_shift_antisymmetric", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      const cplx d = lat.wp(x) - lat.wp(l);
                      Accum a;
                      a.add(lat.wp(x + l));
                      a.add(-lat.wp(x - l));
                      a.add(lat.wp(l, 1) * lat.wp(x, 1) / (d * d));
                      return a.rel();
                  }});

    cs.push_back({"wp_shift_symmetric", 2, guards_xl,
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], l = p[1];
                      const cplx d = lat.wp(x) - lat.wp(l);
                      const cplx wx1 = lat.wp(x, 1), wl1 = lat.wp(l, 1);
                      Accum a;
                      a.add(lat.wp(x + l));
                      a.add(lat.wp(x - l));
                      a.add(-(wx1 * wx1 + wl1 * wl1) / (2.0 * d * d));
                      a.add(2.0 * (lat.wp(x) + lat.wp(l)));
                      return a.rel();
                  }});

    cs.push_back({"zeta_three_term", 2,
                  [](const Pts& p, Pts& g) {
                      g = {p[0], p[1], p[0] - p[1], p[0] + p[1]};
                  },
                  [](const Lattice& lat, const Pts& p) {
                      const cplx x = p[0], y = p[1];
                      Accum a;
                      a.add(lat.zeta(x));
                      a.add(-lat.zeta(y));
                      a.add(-lat.zeta(x - y));
                      a.add((lat.wp(x, 1) + lat.wp(y, 1)) /
                            (2.0 * (lat.wp(x) - lat.wp(y))));
                      return a.rel();
                  }});

    cs.push_back({"wp_third_derivative", 1,
                  [](const Pts& p, Pts& g) { g = {p[0]}; },
                  [](const Lattice& lat, const Pts& p) {
                      Accum a;
                      a.add(lat.wp(p[0], 3));
                      a.add(-12.0 * lat.wp(p[0]) * lat.wp(p[0], 1));
                      return a.rel();
                  }});

    cs.push_back({"wp_gradient_sum_3", 3, guards_pairwise, eval_gradient_sum});
    cs.push_back({"wp_gradient_sum_4", 4, guards_pairwise, eval_gradient_sum});

    cs.push_back({"zeta_wp_cancellation_2", 4, guards_two_families,
                  eval_cancellation});
    cs.push_back({"zeta_wp_cancellation_3", 6, guards_two_families,
                  eval_cancellation});
    cs.push_back({"zeta_wp_cancellation_4", 8, guards_two_families,
                  eval_cancellation});

    return cs;
}

} // namespace

std::vector<IdentityResult> identity_suite(const Lattice& lat, int trials,
                                           std::uint64_t seed) {
    if (trials <= 0) throw config_error("identity_suite: trials must be positive");
    const double margin = 0.05 * lat.cell_scale();
    Rng rng(seed);
    std::vector<IdentityResult> out;
    for (const Check& c : make_checks()) {
        IdentityResult res{c.name, 0.0};
        for (int t = 0; t < trials; ++t) {
            const Pts p = draw_clear(lat, rng, c, margin);
            res.max_rel_residual = std::max(res.max_rel_residual, c.eval(lat, p));
        }
        out.push_back(std::move(res));
    }
    return out;
}

} // namespace ellab

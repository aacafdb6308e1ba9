#include "ellab/manybody.hpp"

#include "ellab/kernel.hpp"

namespace ellab {

void check_distinct(const Lattice& lat, const std::vector<cplx>& x,
                    double margin) {
    const double tol = margin * lat.cell_scale();
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t j = i + 1; j < x.size(); ++j)
            if (lat.pole_distance(x[i] - x[j]) < tol)
                throw collision_error("particle coordinates collided modulo "
                                      "the lattice");
}

namespace {

CMatrix phi_matrix_impl(const Lattice& lat, const std::vector<cplx>& x,
                        cplx lambda, int order, bool stripped, cplx shift,
                        bool full) {
    const int n = static_cast<int>(x.size());
    CMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j && !full) continue;
            const cplx arg = x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)] + shift;
            m(i, j) = stripped ? phi_stripped(lat, arg, lambda, order)
                               : phi(lat, arg, lambda, order);
        }
    return m;
}

} // namespace

CMatrix phi_matrix(const Lattice& lat, const std::vector<cplx>& x, cplx lambda,
                   int order, bool stripped, cplx shift) {
    return phi_matrix_impl(lat, x, lambda, order, stripped, shift, false);
}

CMatrix phi_matrix_full(const Lattice& lat, const std::vector<cplx>& x,
                        cplx lambda, int order, bool stripped, cplx shift) {
    return phi_matrix_impl(lat, x, lambda, order, stripped, shift, true);
}

CMatrix wp_diag(const Lattice& lat, const std::vector<cplx>& x, int order) {
    const int n = static_cast<int>(x.size());
    CMatrix m(n);
    for (int i = 0; i < n; ++i) {
        cplx s = 0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            s += lat.wp(x[static_cast<size_t>(i)] - x[static_cast<size_t>(k)], order);
        }
        m(i, i) = s;
    }
    return m;
}

CMatrix wp_diag_weighted(const Lattice& lat, const std::vector<cplx>& x,
                         const std::vector<cplx>& w, int order) {
    if (w.size() != x.size())
        throw config_error("wp_diag_weighted: weight count mismatch");
    const int n = static_cast<int>(x.size());
    CMatrix m(n);
    for (int i = 0; i < n; ++i) {
        cplx s = 0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            s += w[static_cast<size_t>(k)] *
                 lat.wp(x[static_cast<size_t>(i)] - x[static_cast<size_t>(k)], order);
        }
        m(i, i) = s;
    }
    return m;
}

CMatrix zeta_diag_weighted(const Lattice& lat, const std::vector<cplx>& x,
                           const std::vector<cplx>& w, cplx shift) {
    if (w.size() != x.size())
        throw config_error("zeta_diag_weighted: weight count mismatch");
    const int n = static_cast<int>(x.size());
    CMatrix m(n);
    for (int i = 0; i < n; ++i) {
        cplx s = 0;
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            s += w[static_cast<size_t>(k)] *
                 lat.zeta(x[static_cast<size_t>(i)] - x[static_cast<size_t>(k)] + shift);
        }
        m(i, i) = s;
    }
    return m;
}

} // namespace ellab

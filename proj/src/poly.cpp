#include "ellab/poly.hpp"

#include <algorithm>
#include <cmath>

namespace ellab {

PolyInZ make_poly(std::vector<cplx> coeffs) {
    double maxc = 0;
    for (const auto& v : coeffs) maxc = std::max(maxc, std::abs(v));
    while (coeffs.size() > 1 && std::abs(coeffs.back()) < 1e-12 * maxc)
        coeffs.pop_back();
    return PolyInZ{std::move(coeffs)};
}

std::vector<cplx> circle_nodes(int count, double radius) {
    if (count <= 0) throw config_error("circle_nodes: count must be positive");
    std::vector<cplx> out(static_cast<size_t>(count));
    const double pi = std::acos(-1.0);
    for (int j = 0; j < count; ++j) {
        const double a = 2.0 * pi * j / count;
        out[static_cast<size_t>(j)] = radius * cplx(std::cos(a), std::sin(a));
    }
    return out;
}

PolyInZ charpoly_in_z(const std::function<CMatrix(cplx)>& builder, int degree,
                      const std::vector<cplx>& nodes) {
    if (degree < 0) throw config_error("charpoly_in_z: negative degree");
    const int m = degree + 1;
    if (static_cast<int>(nodes.size()) != m)
        throw config_error("charpoly_in_z: need degree + 1 nodes");
    CMatrix vand(m);
    std::vector<cplx> rhs(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        cplx p = 1.0;
        for (int k = 0; k < m; ++k) {
            vand(j, k) = p;
            p *= nodes[static_cast<size_t>(j)];
        }
        rhs[static_cast<size_t>(j)] = determinant(builder(nodes[static_cast<size_t>(j)]));
    }
    if (inf_norm(vand) * inf_norm(inverse(vand)) > 1e12)
        throw conditioning_error("charpoly_in_z: interpolation nodes are too "
                                 "ill-conditioned");
    return make_poly(solve(std::move(vand), std::move(rhs)));
}

std::vector<cplx> poly_roots(const PolyInZ& p) {
    const int d = p.degree();
    if (d < 1) return {};
    std::vector<cplx> monic(p.c);
    const cplx lead = monic.back();
    for (auto& v : monic) v /= lead;

    std::vector<cplx> z(static_cast<size_t>(d));
    const cplx seed(0.4, 0.9);
    cplx cur(1.0);
    for (int k = 0; k < d; ++k) {
        cur *= seed;
        z[static_cast<size_t>(k)] = cur;
    }
    auto eval = [&](cplx x) {
        cplx acc = 1.0;
        for (size_t i = monic.size() - 1; i-- > 0;) acc = acc * x + monic[i];
        return acc;
    };
    for (int it = 0; it < 500; ++it) {
        double worst = 0;
        for (int k = 0; k < d; ++k) {
            cplx denom = 1.0;
            for (int j = 0; j < d; ++j)
                if (j != k)
                    denom *= z[static_cast<size_t>(k)] - z[static_cast<size_t>(j)];
            const cplx step = eval(z[static_cast<size_t>(k)]) / denom;
            z[static_cast<size_t>(k)] -= step;
            worst = std::max(worst,
                             std::abs(step) /
                                 (1.0 + std::abs(z[static_cast<size_t>(k)])));
        }
        if (worst < 1e-14) return z;
    }
    throw convergence_error("poly_roots: root iteration did not converge");
}

} // namespace ellab

#include "ellab/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace ellab {

CMatrix CMatrix::identity(int n) {
    CMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::diagonal(const std::vector<cplx>& d) {
    CMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n(); ++i) m(i, i) = d[static_cast<size_t>(i)];
    return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    if (o.n_ != n_) throw config_error("CMatrix: size mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    if (o.n_ != n_) throw config_error("CMatrix: size mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
    for (auto& v : a_) v *= s;
    return *this;
}

cplx CMatrix::trace() const {
    cplx t = 0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

double CMatrix::max_abs() const {
    double m = 0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.n() != b.n()) throw config_error("CMatrix: size mismatch");
    const int n = a.n();
    CMatrix c(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx(0.0)) continue;
            for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

std::vector<cplx> operator*(const CMatrix& a, const std::vector<cplx>& v) {
    if (static_cast<int>(v.size()) != a.n())
        throw config_error("CMatrix: vector size mismatch");
    std::vector<cplx> out(v.size());
    for (int i = 0; i < a.n(); ++i) {
        cplx s = 0;
        for (int j = 0; j < a.n(); ++j) s += a(i, j) * v[static_cast<size_t>(j)];
        out[static_cast<size_t>(i)] = s;
    }
    return out;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

double inf_norm(const CMatrix& a) {
    double best = 0;
    for (int i = 0; i < a.n(); ++i) {
        double row = 0;
        for (int j = 0; j < a.n(); ++j) row += std::abs(a(i, j));
        best = std::max(best, row);
    }
    return best;
}

namespace {

// In-place LU with partial pivoting.  Returns the permutation sign, or
// 0 if elimination hit an exactly zero pivot.  When `nudge` is set,
// vanishing pivots are replaced by a tiny multiple of the matrix scale
// so that back substitution can proceed (used for inverse iteration).
int lu_factor(CMatrix& m, std::vector<int>& piv, bool nudge) {
    const int n = m.n();
    const double scale = std::max(inf_norm(m), 1.0);
    piv.resize(static_cast<size_t>(n));
    int sign = 1;
    for (int col = 0; col < n; ++col) {
        int best = col;
        double bestv = std::abs(m(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(m(r, col));
            if (v > bestv) {
                bestv = v;
                best = r;
            }
        }
        if (best != col) {
            for (int j = 0; j < n; ++j) std::swap(m(col, j), m(best, j));
            sign = -sign;
        }
        piv[static_cast<size_t>(col)] = best;
        cplx p = m(col, col);
        if (nudge && std::abs(p) < 1e-14 * scale) {
            p = (std::abs(p) == 0.0) ? cplx(1e-14 * scale)
                                     : p * (1e-14 * scale / std::abs(p));
            m(col, col) = p;
        }
        if (p == cplx(0.0)) return 0;
        for (int r = col + 1; r < n; ++r) {
            const cplx f = m(r, col) / p;
            m(r, col) = f;
            if (f == cplx(0.0)) continue;
            for (int j = col + 1; j < n; ++j) m(r, j) -= f * m(col, j);
        }
    }
    return sign;
}

void lu_apply(const CMatrix& lu, const std::vector<int>& piv,
              std::vector<cplx>& b) {
    const int n = lu.n();
    for (int i = 0; i < n; ++i)
        if (piv[static_cast<size_t>(i)] != i)
            std::swap(b[static_cast<size_t>(i)],
                      b[static_cast<size_t>(piv[static_cast<size_t>(i)])]);
    for (int i = 1; i < n; ++i) {
        cplx s = b[static_cast<size_t>(i)];
        for (int j = 0; j < i; ++j) s -= lu(i, j) * b[static_cast<size_t>(j)];
        b[static_cast<size_t>(i)] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        cplx s = b[static_cast<size_t>(i)];
        for (int j = i + 1; j < n; ++j) s -= lu(i, j) * b[static_cast<size_t>(j)];
        b[static_cast<size_t>(i)] = s / lu(i, i);
    }
}

} // namespace

cplx determinant(CMatrix m) {
    std::vector<int> piv;
    const int sign = lu_factor(m, piv, false);
    if (sign == 0) return cplx(0.0);
    cplx det = static_cast<double>(sign);
    for (int i = 0; i < m.n(); ++i) det *= m(i, i);
    return det;
}

std::vector<cplx> solve(CMatrix a, std::vector<cplx> b) {
    if (static_cast<int>(b.size()) != a.n())
        throw config_error("solve: vector size mismatch");
    const double scale = std::max(inf_norm(a), 1.0);
    std::vector<int> piv;
    if (lu_factor(a, piv, false) == 0)
        throw conditioning_error("solve: matrix is singular");
    for (int i = 0; i < a.n(); ++i)
        if (std::abs(a(i, i)) < 1e-14 * scale)
            throw conditioning_error("solve: pivot below conditioning threshold");
    lu_apply(a, piv, b);
    return b;
}

CMatrix inverse(const CMatrix& a) {
    const int n = a.n();
    CMatrix lu = a;
    const double scale = std::max(inf_norm(a), 1.0);
    std::vector<int> piv;
    if (lu_factor(lu, piv, false) == 0)
        throw conditioning_error("inverse: matrix is singular");
    for (int i = 0; i < n; ++i)
        if (std::abs(lu(i, i)) < 1e-14 * scale)
            throw conditioning_error("inverse: pivot below conditioning threshold");
    CMatrix out(n);
    std::vector<cplx> col(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), cplx(0.0));
        col[static_cast<size_t>(j)] = 1.0;
        lu_apply(lu, piv, col);
        for (int i = 0; i < n; ++i) out(i, j) = col[static_cast<size_t>(i)];
    }
    return out;
}

std::vector<cplx> null_vector(const CMatrix& a) {
    const int n = a.n();
    CMatrix lu = a;
    std::vector<int> piv;
    lu_factor(lu, piv, true);
    std::vector<cplx> v(static_cast<size_t>(n), cplx(1.0));
    auto normalize = [&] {
        double s = 0;
        for (const auto& z : v) s += std::norm(z);
        s = std::sqrt(s);
        for (auto& z : v) z /= s;
    };
    normalize();
    for (int it = 0; it < 3; ++it) {
        lu_apply(lu, piv, v);
        normalize();
    }
    // Fix the overall phase deterministically: the largest component
    // becomes real and positive.
    size_t imax = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    const cplx ph = v[imax] / std::abs(v[imax]);
    for (auto& z : v) z /= ph;

    std::vector<cplx> r = a * v;
    double rn = 0;
    for (const auto& z : r) rn = std::max(rn, std::abs(z));
    if (rn > 1e-8 * std::max(inf_norm(a), 1.0))
        throw convergence_error("null_vector: matrix is not close to singular");
    return v;
}

} // namespace ellab

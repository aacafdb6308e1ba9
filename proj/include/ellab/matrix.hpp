#pragma once

#include <complex>
#include <vector>

#include "ellab/errors.hpp"

namespace ellab {

using cplx = std::complex<double>;

// Dense row-major complex matrix, sized once at construction.
class CMatrix {
public:
    explicit CMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n) {
        if (n <= 0) throw config_error("CMatrix: size must be positive");
    }

    static CMatrix identity(int n);
    static CMatrix diagonal(const std::vector<cplx>& d);

    int n() const { return n_; }
    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    cplx operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

    CMatrix& operator+=(const CMatrix& o);
    CMatrix& operator-=(const CMatrix& o);
    CMatrix& operator*=(cplx s);

    cplx trace() const;
    double max_abs() const;

private:
    int n_;
    std::vector<cplx> a_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);
std::vector<cplx> operator*(const CMatrix& a, const std::vector<cplx>& v);

CMatrix commutator(const CMatrix& a, const CMatrix& b);

// Determinant by LU with partial pivoting; an exactly singular matrix
// gives 0 rather than an error.
cplx determinant(CMatrix m);

// Solve a x = b by LU with partial pivoting.  Throws
// conditioning_error if a pivot underflows.
std::vector<cplx> solve(CMatrix a, std::vector<cplx> b);

CMatrix inverse(const CMatrix& a);

double inf_norm(const CMatrix& a);

// Approximate null vector of a (nearly) singular matrix by inverse
// iteration from an LU factorization with zero pivots nudged to a tiny
// value.  The result has unit Euclidean norm.  Throws
// convergence_error if iteration fails to settle.
std::vector<cplx> null_vector(const CMatrix& a);

} // namespace ellab

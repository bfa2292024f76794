#pragma once

#include <Eigen/Dense>

#include <vector>

namespace vsense {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

// Dense symmetric real matrix. Construction checks symmetry to a relative
// tolerance and stores the exactly symmetrized average.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(const Matrix& a, double rel_tol = 1e-9);

    static SymMatrix identity(Index n);
    static SymMatrix zero(Index n);
    static SymMatrix diagonal(const Vector& d);

    Index size() const { return a_.rows(); }
    bool empty() const { return a_.size() == 0; }
    const Matrix& dense() const { return a_; }
    double operator()(Index i, Index j) const { return a_(i, j); }

    // Principal submatrix A(idx, idx).
    SymMatrix principal(const IndexList& idx) const;

    friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
    friend SymMatrix operator*(double s, const SymMatrix& a);

private:
    struct Trusted {};
    SymMatrix(Matrix a, Trusted) : a_(std::move(a)) {}

    Matrix a_;
};

Matrix symmetrize(const Matrix& a);

// Relative asymmetry max|A - A^T| / max|A| (0 for the zero matrix).
double asymmetry(const Matrix& a);

// Cholesky factorization reused for repeated solves. Rejects pivots at or
// below 1e-12 times the largest diagonal entry.
class Factorization {
public:
    Factorization() = default;
    explicit Factorization(const SymMatrix& a);

    Index size() const { return n_; }
    Vector solve(const Vector& b) const;
    Matrix solve(const Matrix& b) const;
    Matrix inverse() const;
    const Matrix& lower() const { return l_; }

private:
    Index n_ = 0;
    Matrix l_;
};

inline Factorization factorize(const SymMatrix& a) { return Factorization(a); }

struct GeneralizedEigen {
    Vector values;   // ascending
    Matrix vectors;  // columns are M-orthonormal
};

// Lowest `count` eigenpairs of K phi = gamma M phi via Cholesky reduction of M.
GeneralizedEigen sym_generalized_eig(const SymMatrix& k, const SymMatrix& m, Index count);

// Lowest `count` eigenvalues with relative accuracy across a wide spectrum.
// When K is positive definite, values below sqrt(gamma_min * gamma_max) are
// taken from the reciprocal problem M phi = (1/gamma) K phi, whose Cholesky
// reduction of K resolves the low end; the rest come from sym_generalized_eig.
Vector sym_generalized_eigenvalues(const SymMatrix& k, const SymMatrix& m, Index count);

// H = [kmm - kc ku^{-1} kc^T]^{-1}. An empty ku yields kmm^{-1}.
SymMatrix schur_complement_inverse(const SymMatrix& kmm, const Matrix& kc, const SymMatrix& ku);

}  // namespace vsense

#include "vsense/numerics.hpp"

#include "vsense/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace vsense {

namespace {

constexpr double kPivotTolerance = 1e-12;

std::string dims(const Matrix& a) {
    std::ostringstream os;
    os << a.rows() << "x" << a.cols();
    return os.str();
}

}  // namespace

Matrix symmetrize(const Matrix& a) {
    return 0.5 * (a + a.transpose());
}

double asymmetry(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

SymMatrix::SymMatrix(const Matrix& a, double rel_tol) {
    if (a.rows() != a.cols()) {
        throw Error(Errc::DimensionMismatch, "symmetric matrix must be square, got " + dims(a));
    }
    if (!a.allFinite()) {
        throw Error(Errc::InvalidArgument, "matrix has non-finite entries");
    }
    if (asymmetry(a) > rel_tol) {
        throw Error(Errc::AsymmetricInput, "matrix is not symmetric within tolerance");
    }
    a_ = symmetrize(a);
}

SymMatrix SymMatrix::identity(Index n) { return SymMatrix(Matrix::Identity(n, n), Trusted{}); }

SymMatrix SymMatrix::zero(Index n) { return SymMatrix(Matrix::Zero(n, n), Trusted{}); }

SymMatrix SymMatrix::diagonal(const Vector& d) {
    return SymMatrix(Matrix(d.asDiagonal()), Trusted{});
}

SymMatrix SymMatrix::principal(const IndexList& idx) const {
    return SymMatrix(Matrix(a_(idx, idx)), Trusted{});
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    if (a.size() != b.size()) {
        throw Error(Errc::DimensionMismatch, "cannot add " + dims(a.a_) + " and " + dims(b.a_));
    }
    return SymMatrix(a.a_ + b.a_, SymMatrix::Trusted{});
}

SymMatrix operator*(double s, const SymMatrix& a) {
    return SymMatrix(s * a.a_, SymMatrix::Trusted{});
}

Factorization::Factorization(const SymMatrix& a) : n_(a.size()) {
    if (n_ == 0) return;
    Eigen::LLT<Matrix> llt(a.dense());
    const double max_diag = a.dense().diagonal().cwiseAbs().maxCoeff();
    if (llt.info() != Eigen::Success || max_diag == 0.0) {
        throw Error(Errc::NotPositiveDefinite, "Cholesky factorization failed");
    }
    l_ = llt.matrixL();
    const double min_pivot = l_.diagonal().array().square().minCoeff();
    if (!(min_pivot > kPivotTolerance * max_diag)) {
        std::ostringstream os;
        os << "pivot " << min_pivot << " below tolerance " << kPivotTolerance * max_diag;
        throw Error(Errc::NotPositiveDefinite, os.str());
    }
}

Vector Factorization::solve(const Vector& b) const {
    if (b.size() != n_) {
        throw Error(Errc::DimensionMismatch, "right-hand side length does not match factorization");
    }
    if (n_ == 0) return b;
    const auto l = l_.triangularView<Eigen::Lower>();
    Vector y = l.solve(b);
    return l.transpose().solve(y);
}

Matrix Factorization::solve(const Matrix& b) const {
    if (b.rows() != n_) {
        throw Error(Errc::DimensionMismatch, "right-hand side rows do not match factorization");
    }
    if (n_ == 0) return b;
    const auto l = l_.triangularView<Eigen::Lower>();
    Matrix y = l.solve(b);
    return l.transpose().solve(y);
}

Matrix Factorization::inverse() const {
    return symmetrize(solve(Matrix(Matrix::Identity(n_, n_))));
}

GeneralizedEigen sym_generalized_eig(const SymMatrix& k, const SymMatrix& m, Index count) {
    const Index n = k.size();
    if (m.size() != n) {
        throw Error(Errc::DimensionMismatch, "K and M dimensions differ");
    }
    if (count < 1 || count > n) {
        throw Error(Errc::InvalidArgument, "eigenpair count out of range");
    }
    const Factorization mf(m);
    const auto l = mf.lower().triangularView<Eigen::Lower>();

    // C = L^{-1} K L^{-T}
    Matrix x = l.solve(k.dense());
    Matrix c = l.solve(Matrix(x.transpose()));
    c = symmetrize(c);

    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::NoConvergence, "symmetric eigensolver did not converge");
    }
    GeneralizedEigen out;
    out.values = es.eigenvalues().head(count);
    out.vectors = l.transpose().solve(es.eigenvectors().leftCols(count));
    return out;
}

Vector sym_generalized_eigenvalues(const SymMatrix& k, const SymMatrix& m, Index count) {
    const GeneralizedEigen upper = sym_generalized_eig(k, m, k.size());
    Vector values = upper.values.head(count);
    Eigen::LLT<Matrix> kf(k.dense());
    if (kf.info() != Eigen::Success || !(upper.values(0) > 0.0)) return values;

    const auto l = kf.matrixL();
    Matrix x = l.solve(m.dense());
    const Matrix c = symmetrize(l.solve(Matrix(x.transpose())));
    Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error(Errc::NoConvergence, "symmetric eigensolver did not converge");
    }
    const Vector& mu = es.eigenvalues();  // ascending, so 1/mu is descending
    const Index n = k.size();
    const double split = std::sqrt(upper.values(0) * upper.values(n - 1));
    for (Index i = 0; i < count; ++i) {
        const double lower = 1.0 / mu(n - 1 - i);
        if (!(mu(n - 1 - i) > 0.0) || lower >= split) break;
        values(i) = lower;
    }
    return values;
}

SymMatrix schur_complement_inverse(const SymMatrix& kmm, const Matrix& kc, const SymMatrix& ku) {
    if (kc.rows() != kmm.size() || kc.cols() != ku.size()) {
        throw Error(Errc::DimensionMismatch, "coupling block " + dims(kc) + " not conformable");
    }
    Matrix schur = kmm.dense();
    if (ku.size() > 0) {
        try {
            const Factorization kuf(ku);
            schur -= kc * kuf.solve(Matrix(kc.transpose()));
        } catch (const Error& e) {
            throw Error(Errc::SingularBlock, std::string("unmeasured block: ") + e.what());
        }
    }
    try {
        const Factorization sf{SymMatrix(symmetrize(schur), 1e-6)};
        return SymMatrix(sf.inverse());
    } catch (const Error& e) {
        throw Error(Errc::SingularBlock, std::string("Schur complement: ") + e.what());
    }
}

}  // namespace vsense

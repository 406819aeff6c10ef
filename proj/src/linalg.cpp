#include "kdx/linalg.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

namespace kdx {

namespace {

double default_jitter(const Matrix& m) {
    const double base = 1e-10 * std::abs(m.diagonal().mean());
    return base > 0.0 ? base : 1e-10;
}

}  // namespace

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
        throw DimensionMismatch("SymMatrix: matrix must be square, got " +
                                std::to_string(m_.rows()) + "x" +
                                std::to_string(m_.cols()));
    if (!m_.allFinite())
        throw NonFiniteInput("SymMatrix: matrix contains non-finite entries");
    for (Index i = 0; i < m_.rows(); ++i) {
        for (Index j = i + 1; j < m_.cols(); ++j) {
            const double a = m_(i, j);
            const double b = m_(j, i);
            if (std::abs(a - b) > 1e-10 * std::max(1.0, std::abs(a)))
                throw NotSymmetric("SymMatrix: entries (" + std::to_string(i) +
                                   "," + std::to_string(j) +
                                   ") differ beyond tolerance");
        }
    }
}

Vector CholFactor::solve(const Vector& b) const {
    if (b.size() != llt_.matrixL().rows())
        throw DimensionMismatch("CholFactor::solve: rhs length " +
                                std::to_string(b.size()) + " != system size " +
                                std::to_string(llt_.matrixL().rows()));
    return llt_.solve(b);
}

Matrix CholFactor::solve(const Matrix& b) const {
    if (b.rows() != llt_.matrixL().rows())
        throw DimensionMismatch("CholFactor::solve: rhs rows " +
                                std::to_string(b.rows()) + " != system size " +
                                std::to_string(llt_.matrixL().rows()));
    return llt_.solve(b);
}

CholFactor chol_factor(const SymMatrix& a, double jitter) {
    const Matrix& m = a.mat();
    if (m.rows() == 0) throw EmptyInput("chol_factor: empty matrix");

    double j = jitter < 0.0 ? default_jitter(m) : jitter;
    // Starting value plus at most three x10 escalations; an explicit 0 first
    // tries the matrix unmodified and escalates into the default ladder.
    for (int attempt = 0; attempt <= 3; ++attempt) {
        Matrix shifted = m;
        if (j != 0.0) shifted.diagonal().array() += j;
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() == Eigen::Success) {
            CholFactor f;
            f.llt_ = std::move(llt);
            f.jitter_ = j;
            return f;
        }
        j = j == 0.0 ? default_jitter(m) : 10.0 * j;
    }
    throw NotPositiveDefinite(
        "chol_factor: matrix not positive definite after 3 jitter "
        "escalations (last jitter " +
        std::to_string(j) + ")");
}

Vector chol_solve(const SymMatrix& a, const Vector& b, double jitter) {
    if (b.size() != a.size())
        throw DimensionMismatch("chol_solve: rhs length " +
                                std::to_string(b.size()) +
                                " != matrix size " + std::to_string(a.size()));
    return chol_factor(a, jitter).solve(b);
}

EigenSys sym_eig(const SymMatrix& a) {
    if (a.size() == 0) throw EmptyInput("sym_eig: empty matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.mat());
    if (es.info() != Eigen::Success)
        throw Error("sym_eig: eigendecomposition did not converge");

    EigenSys out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    // Deterministic sign: the largest-magnitude component of each vector
    // (the first such index on ties) is made positive.
    for (Index c = 0; c < out.vectors.cols(); ++c) {
        Index arg = 0;
        out.vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (out.vectors(arg, c) < 0.0) out.vectors.col(c) *= -1.0;
    }
    return out;
}

}  // namespace kdx

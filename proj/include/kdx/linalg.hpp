#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "kdx/errors.hpp"

namespace kdx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Dense symmetric matrix. Construction validates squareness, finiteness and
// symmetry (|a_ij - a_ji| <= 1e-10 * max(1, |a_ij|)) so factorizations can
// take symmetry for granted.
class SymMatrix {
public:
    explicit SymMatrix(Matrix m);

    const Matrix& mat() const { return m_; }
    Index size() const { return m_.rows(); }

private:
    Matrix m_;
};

// Reusable Cholesky factor of A + jitter*I. `jitter` records the value that
// actually made the factorization succeed.
class CholFactor {
public:
    Vector solve(const Vector& b) const;
    Matrix solve(const Matrix& B) const;
    double jitter() const { return jitter_; }

private:
    friend CholFactor chol_factor(const SymMatrix&, double);
    Eigen::LLT<Matrix> llt_;
    double jitter_ = 0.0;
};

// Factor A + jitter*I, escalating the jitter by x10 at most three times when
// the factorization fails. jitter < 0 selects the default starting value
// 1e-10 * mean(diag(A)); an explicit 0 first tries A unmodified. Throws
// NotPositiveDefinite once the ladder is exhausted.
CholFactor chol_factor(const SymMatrix& a, double jitter = -1.0);

// Solve (A + jitter*I) x = b with the escalation above.
Vector chol_solve(const SymMatrix& a, const Vector& b, double jitter = -1.0);

struct EigenSys {
    Vector values;   // descending
    Matrix vectors;  // columns aligned with `values`
};

// Full symmetric eigendecomposition, eigenvalues sorted descending and each
// eigenvector's largest-magnitude component (first such index on ties) made
// positive so decompositions are reproducible.
EigenSys sym_eig(const SymMatrix& a);

}  // namespace kdx

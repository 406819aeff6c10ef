#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kdx/linalg.hpp"

namespace kdx {

enum class KernelFamily { Linear, Poly, Rbf, Tanh, Ard, Sinc };

std::string family_name(KernelFamily family);
KernelFamily family_from_name(const std::string& name);

// Value-type description of a kernel; only the fields relevant to `family`
// are meaningful. validate() enforces the per-family parameter ranges.
struct KernelSpec {
    KernelFamily family = KernelFamily::Rbf;
    double gamma = 1.0;                 // poly/rbf/tanh scale, > 0
    double coef0 = 1.0;                 // poly/tanh offset, >= 0
    int degree = 2;                     // poly, integer >= 1
    std::vector<double> lengthscales;   // ard, all > 0, one per feature
    double signal_var = 1.0;            // ard amplitude, > 0
    double bandwidth = 1.0;             // sinc W, > 0

    static KernelSpec linear();
    static KernelSpec poly(double gamma, double coef0, int degree);
    static KernelSpec rbf(double gamma);
    static KernelSpec tanh(double gamma, double coef0);
    static KernelSpec ard(std::vector<double> lengthscales,
                          double signal_var = 1.0);
    static KernelSpec sinc(double bandwidth);

    // Throws ConfigError on out-of-range parameters; when dim >= 0 also
    // checks the family's dimensionality requirement (DimensionMismatch).
    void validate(Index dim = -1) const;

    // Families with a positive semi-definite Gram matrix (tanh excluded).
    bool psd() const { return family != KernelFamily::Tanh; }

    nlohmann::json to_json() const;
    // Strict parse: "family" required, unknown/foreign fields rejected,
    // omitted family fields take the defaults above (ard lengthscales are
    // mandatory).
    static KernelSpec from_json(const nlohmann::json& j);
};

// k(x, y). Throws DimensionMismatch / NonFiniteInput on bad operands.
double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y);

// dk/dx, length d.
Vector kernel_grad_x(const KernelSpec& spec, const Vector& x, const Vector& y);

// d^2 k / dx dx^T, d x d symmetric.
Matrix kernel_hessian_x(const KernelSpec& spec, const Vector& x,
                        const Vector& y);

// m-th successive partial of the rbf kernel along coordinate j, via the
// two-term recurrence D_m = g'*D_{m-1} + (m-1)*g''*D_{m-2} with
// g = -gamma*||x-y||^2 (g''' = 0). Requires spec.family == Rbf, 0 <= j < d,
// m >= 1 (InvalidOrder otherwise).
double rbf_nth_partial(const KernelSpec& spec, const Vector& x,
                       const Vector& y, int j, int m);

// Gram matrix K_ij = k(x_i, x_j); symmetric by construction (each pair
// evaluated once). `threads` > 1 parallelizes rows.
Matrix gram(const KernelSpec& spec, const Matrix& x, int threads = 1);

// Cross-Gram K_ij = k(a_i, b_j).
Matrix gram_cross(const KernelSpec& spec, const Matrix& a, const Matrix& b);

// Column vector [dk(x*, x_i)/dx*^j]_i over the rows of X.
Vector gram_grad_col(const KernelSpec& spec, const Matrix& x,
                     const Vector& xs, int j);

// [d k(a_i, b_l) / d a_i^j]_{il}: first-argument partial along coordinate j
// for every (row of A, row of B) pair. Row i of the result is the j-th
// gradient component of k(a_i, .) over B.
Matrix gram_grad(const KernelSpec& spec, const Matrix& a, const Matrix& b,
                 int j);

// Same stacking for the second unmixed partial d^2 k / d(a_i^j)^2.
Matrix gram_hessian_diag(const KernelSpec& spec, const Matrix& a,
                         const Matrix& b, int j);

// Explicit feature map of the degree-2 polynomial kernel with gamma=1,
// coef0=1 in d=2: phi(x) = (1, x1^2, x2^2, sqrt2*x1, sqrt2*x2, sqrt2*x1*x2);
// phi(x).phi(y) == (1 + x.y)^2.
Vector poly2_feature_map(const Vector& x);

// gamma = 1 / (2 * median(pairwise distances)^2) over all i<j pairs; falls
// back to 1.0 when the median distance is zero (mostly-duplicate data).
double median_heuristic_gamma(const Matrix& x);

}  // namespace kdx

#pragma once

#include <json.hpp>

#include "kdx/kernels.hpp"
#include "kdx/sensitivity.hpp"

namespace kdx {

// Empirical norms of the fitted mean function over the training samples:
//   h_norm    = alpha' K alpha            (RKHS norm of f)
//   l2_norm   = ||K alpha||^2             (function values)
//   grad_norm = sum_j ||G_j alpha||^2     (gradient components)
//   lap_norm  = ||(sum_j G2_j) alpha||^2  (Laplacian)
// where [G_j]_il = dk(x, x_l)/dx^j and [G2_j]_il = d^2k/d(x^j)^2, both
// evaluated at x = x_i over the training inputs.
struct RegularizerNorms {
    double h_norm = 0.0;
    double l2_norm = 0.0;
    double grad_norm = 0.0;
    double lap_norm = 0.0;
};

// Gaussian-process regression posterior mean/variance plus the analytic
// derivatives of the mean.
class GprModel {
public:
    // Solves (K + noise_var*I) alpha = y via the jittered Cholesky ladder.
    // jitter < 0 selects the numerics default.
    static GprModel fit(const Matrix& x, const Vector& y,
                        const KernelSpec& kernel, double noise_var,
                        double jitter = -1.0);

    double predict_mean(const Vector& xs) const;
    Vector predict_mean(const Matrix& xs) const;

    // Posterior variance noise_var + k** - k*'(K+noise_var I)^{-1}k*;
    // negative round-off is clamped to 0.
    double predict_var(const Vector& xs) const;

    // d mu(x)/dx: gradient of the posterior mean, length d.
    Vector mean_gradient(const Vector& xs) const;

    // Unmixed second partials d^2 mu(x)/d(x^j)^2, length d.
    Vector mean_hessian_diag(const Vector& xs) const;

    // mean_gradient stacked over the rows of xs.
    DerivField mean_gradient_field(const Matrix& xs) const;

    RegularizerNorms regularizer_norms() const;

    const KernelSpec& kernel() const { return kernel_; }
    const Matrix& x_train() const { return x_; }
    const Vector& alpha() const { return alpha_; }
    double noise_var() const { return noise_var_; }

    nlohmann::json to_json() const;
    // Restores the model; the Cholesky factor for predict_var is recomputed
    // from the stored inputs.
    static GprModel from_json(const nlohmann::json& j);

private:
    GprModel(KernelSpec kernel, Matrix x, Vector alpha, double noise_var,
             CholFactor factor);

    KernelSpec kernel_;
    Matrix x_;
    Vector alpha_;
    double noise_var_ = 0.0;
    CholFactor factor_;
};

}  // namespace kdx

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kdx/kernels.hpp"

namespace kdx {

// Parzen: uniform weights 1/n. Keca: weights E_r E_r' 1 / n with the top-r
// eigenpairs of the Gram matrix by eigenvalue. EntropyKeca: same weights but
// the r eigenpairs with the largest information-potential contribution
// lambda_i * (e_i' 1)^2. With r = n all three coincide.
enum class DensityMode { Parzen, Keca, EntropyKeca };

std::string density_mode_name(DensityMode mode);
DensityMode density_mode_from_name(const std::string& name);

// Unnormalized kernel density model p(x) = sum_i w_i k(x, x_i) with analytic
// gradient and Hessian.
class DensityModel {
public:
    // rank is ignored for Parzen; otherwise requires 1 <= rank <= n
    // (InvalidRank). PSD kernel families only (ConfigError).
    static DensityModel fit(const Matrix& x, const KernelSpec& kernel,
                            DensityMode mode, Index rank = 0);

    // Assemble a model from explicit weights (deserialization and
    // degenerate-weight experiments).
    DensityModel(Matrix x, KernelSpec kernel, DensityMode mode, Index rank,
                 Vector weights);

    double density_at(const Vector& xs) const;
    Vector density_gradient(const Vector& xs) const;
    Matrix density_hessian(const Vector& xs) const;

    const Matrix& x_train() const { return x_; }
    const KernelSpec& kernel() const { return kernel_; }
    DensityMode mode() const { return mode_; }
    Index rank() const { return rank_; }
    const Vector& weights() const { return weights_; }

    nlohmann::json to_json() const;
    static DensityModel from_json(const nlohmann::json& j);

private:
    Matrix x_;
    KernelSpec kernel_;
    DensityMode mode_ = DensityMode::Parzen;
    Index rank_ = 0;
    Vector weights_;
};

struct RidgeOptions {
    int r_ridge = 1;        // ridge dimension, 1 <= r_ridge <= d
    double quantile = 0.05; // selection cut when tol < 0
    double tol = -1.0;      // absolute score threshold override
    // false: project the gradient onto the (d - r_ridge) trailing
    // (smallest-eigenvalue) Hessian eigenvectors — near-zero score means the
    // gradient lies in the span of the top r_ridge (ridge condition).
    // true: project onto the top r_ridge eigenvectors instead.
    bool top_subspace = false;
};

struct RidgeResult {
    Vector scores;              // one per evaluated point
    std::vector<int> selected;  // indices with score <= threshold
    double threshold = 0.0;     // the cut actually applied
};

// Ridge criterion ||E' g|| / (||g|| + 1e-12) per evaluation point, where E
// is the eigenvector subset described by RidgeOptions and g the density
// gradient.
RidgeResult ridge_scores(const DensityModel& model, const Matrix& points,
                         const RidgeOptions& opts);

}  // namespace kdx

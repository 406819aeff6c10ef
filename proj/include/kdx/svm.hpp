#pragma once

#include <cstdint>

#include <json.hpp>

#include "kdx/kernels.hpp"
#include "kdx/sensitivity.hpp"

namespace kdx {

struct SvmTrainOptions {
    double c = 1.0;            // box constraint, > 0
    double tol = 1e-3;         // KKT tolerance
    long max_passes = -1;      // cap on accepted pair updates; -1 -> 100*n
    std::uint64_t seed = 0;    // pair-selection fallback RNG
};

// Gradient of the smoothed classifier g(x) = tanh(f(x)), decomposed into
// mask_term = 1 - tanh^2(f(x)), kernel_grad = grad f, and their product
// full_grad = mask_term * kernel_grad (exact, not approximate).
struct SmoothGrad {
    Vector kernel_grad;
    Vector full_grad;
    double mask_term = 0.0;
};

// Two-class SVM trained with sequential minimal optimization (simplified
// Platt variant: first index from a KKT-violation scan, second index by
// max |E_i - E_j| with a seeded random fallback).
class SvmModel {
public:
    // y entries must be exactly -1 or +1 and contain both classes.
    static SvmModel train(const Matrix& x, const Vector& y,
                          const KernelSpec& kernel,
                          const SvmTrainOptions& opts = {});

    // f(x) = sum_i coef_i k(x, sv_i) + b.
    double decision(const Vector& xs) const;
    Vector decision(const Matrix& xs) const;

    // sign(f); f == 0 maps to +1.
    int predict(const Vector& xs) const;

    // grad f(x), length d.
    Vector decision_gradient(const Vector& xs) const;

    SmoothGrad smooth_decision_gradient(const Vector& xs) const;

    // smooth_decision_gradient().full_grad stacked over rows of xs.
    DerivField smooth_decision_field(const Matrix& xs) const;

    const KernelSpec& kernel() const { return kernel_; }
    const Matrix& support_vectors() const { return sv_x_; }
    const Vector& coefficients() const { return sv_coef_; }  // y_i * alpha_i
    double bias() const { return bias_; }
    double c() const { return c_; }
    bool converged() const { return converged_; }

    nlohmann::json to_json() const;
    static SvmModel from_json(const nlohmann::json& j);

private:
    SvmModel(KernelSpec kernel, Matrix sv_x, Vector sv_coef, double bias,
             double c, bool converged);

    KernelSpec kernel_;
    Matrix sv_x_;      // support vectors only (alpha > 0)
    Vector sv_coef_;   // y_i * alpha_i, 0 < |coef| <= C
    double bias_ = 0.0;
    double c_ = 1.0;
    bool converged_ = true;
};

}  // namespace kdx

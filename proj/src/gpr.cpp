#include "kdx/gpr.hpp"

#include <cmath>
#include <utility>

#include "kdx/detail/json_mat.hpp"

namespace kdx {

namespace {

void check_training_data(const Matrix& x, const Vector& y,
                         const KernelSpec& kernel, double noise_var) {
    if (x.rows() == 0) throw EmptyInput("gpr: no training samples");
    if (x.rows() != y.size())
        throw SampleCountMismatch("gpr: " + std::to_string(x.rows()) +
                                  " inputs vs " + std::to_string(y.size()) +
                                  " targets");
    if (!x.allFinite() || !y.allFinite())
        throw NonFiniteInput("gpr: training data contains non-finite values");
    if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
        throw ConfigError("gpr: noise_var must be >= 0");
    kernel.validate(x.cols());
}

void check_query(const Matrix& x_train, const Vector& xs) {
    if (xs.size() != x_train.cols())
        throw DimensionMismatch("gpr: query dimension " +
                                std::to_string(xs.size()) +
                                " != training dimension " +
                                std::to_string(x_train.cols()));
    if (!xs.allFinite())
        throw NonFiniteInput("gpr: query point is non-finite");
}

}  // namespace

GprModel::GprModel(KernelSpec kernel, Matrix x, Vector alpha, double noise_var,
                   CholFactor factor)
    : kernel_(std::move(kernel)),
      x_(std::move(x)),
      alpha_(std::move(alpha)),
      noise_var_(noise_var),
      factor_(std::move(factor)) {}

GprModel GprModel::fit(const Matrix& x, const Vector& y,
                       const KernelSpec& kernel, double noise_var,
                       double jitter) {
    check_training_data(x, y, kernel, noise_var);
    Matrix k = gram(kernel, x);
    k.diagonal().array() += noise_var;
    CholFactor factor = chol_factor(SymMatrix{std::move(k)}, jitter);
    Vector alpha = factor.solve(y);
    return GprModel(kernel, x, std::move(alpha), noise_var, std::move(factor));
}

double GprModel::predict_mean(const Vector& xs) const {
    check_query(x_, xs);
    double mu = 0.0;
    for (Index i = 0; i < x_.rows(); ++i)
        mu += alpha_[i] * kernel_eval(kernel_, xs, x_.row(i).transpose());
    return mu;
}

Vector GprModel::predict_mean(const Matrix& xs) const {
    Vector out(xs.rows());
    for (Index i = 0; i < xs.rows(); ++i)
        out[i] = predict_mean(Vector(xs.row(i).transpose()));
    return out;
}

double GprModel::predict_var(const Vector& xs) const {
    check_query(x_, xs);
    Vector ks(x_.rows());
    for (Index i = 0; i < x_.rows(); ++i)
        ks[i] = kernel_eval(kernel_, xs, x_.row(i).transpose());
    const double kss = kernel_eval(kernel_, xs, xs);
    const double var = noise_var_ + kss - ks.dot(factor_.solve(ks));
    return var < 0.0 ? 0.0 : var;  // round-off clamp
}

Vector GprModel::mean_gradient(const Vector& xs) const {
    check_query(x_, xs);
    Vector g = Vector::Zero(x_.cols());
    for (Index i = 0; i < x_.rows(); ++i)
        g += alpha_[i] * kernel_grad_x(kernel_, xs, x_.row(i).transpose());
    return g;
}

Vector GprModel::mean_hessian_diag(const Vector& xs) const {
    check_query(x_, xs);
    Vector h = Vector::Zero(x_.cols());
    for (Index i = 0; i < x_.rows(); ++i)
        h += alpha_[i] *
             kernel_hessian_x(kernel_, xs, x_.row(i).transpose()).diagonal();
    return h;
}

DerivField GprModel::mean_gradient_field(const Matrix& xs) const {
    DerivField field;
    field.values.resize(xs.rows(), x_.cols());
    for (Index i = 0; i < xs.rows(); ++i)
        field.values.row(i) =
            mean_gradient(Vector(xs.row(i).transpose())).transpose();
    return field;
}

RegularizerNorms GprModel::regularizer_norms() const {
    const Index d = x_.cols();
    RegularizerNorms norms;

    const Matrix k = gram(kernel_, x_);
    const Vector ka = k * alpha_;
    norms.h_norm = alpha_.dot(ka);
    norms.l2_norm = ka.squaredNorm();

    Matrix lap_stack = Matrix::Zero(x_.rows(), x_.rows());
    for (Index j = 0; j < d; ++j) {
        const Matrix gj = gram_grad(kernel_, x_, x_, static_cast<int>(j));
        norms.grad_norm += (gj * alpha_).squaredNorm();
        lap_stack += gram_hessian_diag(kernel_, x_, x_, static_cast<int>(j));
    }
    norms.lap_norm = (lap_stack * alpha_).squaredNorm();
    return norms;
}

nlohmann::json GprModel::to_json() const {
    nlohmann::json j;
    j["kind"] = "gpr";
    j["kernel"] = kernel_.to_json();
    j["x_train"] = detail::matrix_to_json(x_);
    j["alpha"] = detail::vector_to_json(alpha_);
    j["noise_var"] = noise_var_;
    return j;
}

GprModel GprModel::from_json(const nlohmann::json& j) {
    detail::require_kind(j, "gpr");
    KernelSpec kernel = KernelSpec::from_json(detail::require_field(j, "kernel"));
    Matrix x = detail::matrix_from_json(detail::require_field(j, "x_train"),
                                        "x_train");
    Vector alpha =
        detail::vector_from_json(detail::require_field(j, "alpha"), "alpha");
    const auto& nv = detail::require_field(j, "noise_var");
    if (!nv.is_number())
        throw ConfigError("model JSON: 'noise_var' must be a number");
    const double noise_var = nv.get<double>();

    if (x.rows() != alpha.size())
        throw ConfigError("model JSON: alpha length does not match x_train");
    kernel.validate(x.cols());
    if (!(noise_var >= 0.0))
        throw ConfigError("model JSON: noise_var must be >= 0");

    // Rebuild the predictive-variance factor from the stored inputs.
    Matrix k = gram(kernel, x);
    k.diagonal().array() += noise_var;
    CholFactor factor = chol_factor(SymMatrix{std::move(k)});
    return GprModel(std::move(kernel), std::move(x), std::move(alpha),
                    noise_var, std::move(factor));
}

}  // namespace kdx

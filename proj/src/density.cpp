#include "kdx/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "kdx/detail/json_mat.hpp"
#include "kdx/errors.hpp"
#include "kdx/linalg.hpp"

namespace kdx {

namespace {

void check_samples(const Matrix& x) {
    if (x.rows() == 0 || x.cols() == 0)
        throw EmptyInput("density: empty sample matrix");
    if (!x.allFinite())
        throw NonFiniteInput("density: samples contain non-finite values");
}

void check_kernel(const KernelSpec& kernel, Index dim) {
    kernel.validate(dim);
    if (!kernel.psd())
        throw ConfigError("density: kernel family '" +
                          family_name(kernel.family) +
                          "' is not positive semi-definite");
}

void check_query(const Matrix& x, const Vector& p) {
    if (p.size() != x.cols())
        throw DimensionMismatch("density: query has dimension " +
                                std::to_string(p.size()) + ", model expects " +
                                std::to_string(x.cols()));
    if (!p.allFinite())
        throw NonFiniteInput("density: query contains non-finite values");
}

Vector spectral_weights(const Matrix& x, const KernelSpec& kernel,
                        DensityMode mode, Index rank) {
    const Index n = x.rows();
    if (rank < 1 || rank > n)
        throw InvalidRank("density: rank " + std::to_string(rank) +
                          " outside [1, " + std::to_string(n) + "]");
    const EigenSys es = sym_eig(SymMatrix(gram(kernel, x)));
    const Vector ones = Vector::Ones(n);

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    if (mode == DensityMode::EntropyKeca) {
        Vector contrib(n);
        for (Index i = 0; i < n; ++i) {
            const double proj = es.vectors.col(i).dot(ones);
            contrib[i] = es.values[i] * proj * proj;
        }
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            return contrib[a] > contrib[b];
        });
    }

    Vector w = Vector::Zero(n);
    for (Index r = 0; r < rank; ++r) {
        const Index i = order[static_cast<std::size_t>(r)];
        w += es.vectors.col(i) * es.vectors.col(i).dot(ones);
    }
    return w / static_cast<double>(n);
}

}  // namespace

std::string density_mode_name(DensityMode mode) {
    switch (mode) {
        case DensityMode::Parzen: return "parzen";
        case DensityMode::Keca: return "keca";
        case DensityMode::EntropyKeca: return "entropy_keca";
    }
    throw ConfigError("density: unknown mode enum value");
}

DensityMode density_mode_from_name(const std::string& name) {
    if (name == "parzen") return DensityMode::Parzen;
    if (name == "keca") return DensityMode::Keca;
    if (name == "entropy_keca") return DensityMode::EntropyKeca;
    throw ConfigError("density: unknown mode '" + name + "'");
}

DensityModel::DensityModel(Matrix x, KernelSpec kernel, DensityMode mode,
                           Index rank, Vector weights)
    : x_(std::move(x)),
      kernel_(std::move(kernel)),
      mode_(mode),
      rank_(rank),
      weights_(std::move(weights)) {
    check_samples(x_);
    check_kernel(kernel_, x_.cols());
    if (weights_.size() != x_.rows())
        throw SampleCountMismatch("density: " + std::to_string(weights_.size()) +
                                  " weights for " + std::to_string(x_.rows()) +
                                  " samples");
    if (!weights_.allFinite())
        throw NonFiniteInput("density: weights contain non-finite values");
}

DensityModel DensityModel::fit(const Matrix& x, const KernelSpec& kernel,
                               DensityMode mode, Index rank) {
    check_samples(x);
    check_kernel(kernel, x.cols());
    Vector w;
    if (mode == DensityMode::Parzen) {
        w = Vector::Constant(x.rows(), 1.0 / static_cast<double>(x.rows()));
        rank = 0;
    } else {
        w = spectral_weights(x, kernel, mode, rank);
    }
    return DensityModel(x, kernel, mode, rank, std::move(w));
}

double DensityModel::density_at(const Vector& xs) const {
    check_query(x_, xs);
    double p = 0.0;
    for (Index i = 0; i < x_.rows(); ++i)
        p += weights_[i] * kernel_eval(kernel_, xs, Vector(x_.row(i).transpose()));
    return p;
}

Vector DensityModel::density_gradient(const Vector& xs) const {
    check_query(x_, xs);
    Vector g = Vector::Zero(xs.size());
    for (Index i = 0; i < x_.rows(); ++i)
        g += weights_[i] *
             kernel_grad_x(kernel_, xs, Vector(x_.row(i).transpose()));
    return g;
}

Matrix DensityModel::density_hessian(const Vector& xs) const {
    check_query(x_, xs);
    Matrix h = Matrix::Zero(xs.size(), xs.size());
    for (Index i = 0; i < x_.rows(); ++i)
        h += weights_[i] *
             kernel_hessian_x(kernel_, xs, Vector(x_.row(i).transpose()));
    return h;
}

nlohmann::json DensityModel::to_json() const {
    nlohmann::json j;
    j["kind"] = "density";
    j["kernel"] = kernel_.to_json();
    j["x_train"] = detail::matrix_to_json(x_);
    j["mode"] = density_mode_name(mode_);
    j["rank"] = rank_;
    j["weights"] = detail::vector_to_json(weights_);
    return j;
}

DensityModel DensityModel::from_json(const nlohmann::json& j) {
    detail::require_kind(j, "density");
    KernelSpec kernel = KernelSpec::from_json(detail::require_field(j, "kernel"));
    Matrix x = detail::matrix_from_json(detail::require_field(j, "x_train"),
                                        "density x_train");
    const auto& jm = detail::require_field(j, "mode");
    if (!jm.is_string())
        throw ConfigError("density model: mode must be a string");
    const DensityMode mode = density_mode_from_name(jm.get<std::string>());
    const auto& jr = detail::require_field(j, "rank");
    if (!jr.is_number_integer())
        throw ConfigError("density model: rank must be an integer");
    Vector w = detail::vector_from_json(detail::require_field(j, "weights"),
                                        "density weights");
    return DensityModel(std::move(x), std::move(kernel), mode,
                        jr.get<Index>(), std::move(w));
}

RidgeResult ridge_scores(const DensityModel& model, const Matrix& points,
                         const RidgeOptions& opts) {
    const Index d = model.x_train().cols();
    if (points.rows() == 0 || points.cols() == 0)
        throw EmptyInput("ridge: empty evaluation points");
    if (points.cols() != d)
        throw DimensionMismatch("ridge: points have dimension " +
                                std::to_string(points.cols()) +
                                ", model expects " + std::to_string(d));
    if (!points.allFinite())
        throw NonFiniteInput("ridge: points contain non-finite values");
    if (opts.r_ridge < 1 || opts.r_ridge > d)
        throw InvalidRank("ridge: r_ridge " + std::to_string(opts.r_ridge) +
                          " outside [1, " + std::to_string(d) + "]");
    if (opts.tol < 0.0 && !(opts.quantile > 0.0 && opts.quantile <= 1.0))
        throw ConfigError("ridge: quantile must lie in (0, 1]");

    RidgeResult res;
    res.scores.resize(points.rows());
    for (Index i = 0; i < points.rows(); ++i) {
        const Vector p = points.row(i).transpose();
        const Vector g = model.density_gradient(p);
        const EigenSys es = sym_eig(SymMatrix(model.density_hessian(p)));
        const Matrix sub = opts.top_subspace
                               ? Matrix(es.vectors.leftCols(opts.r_ridge))
                               : Matrix(es.vectors.rightCols(d - opts.r_ridge));
        res.scores[i] = (sub.transpose() * g).norm() / (g.norm() + 1e-12);
    }

    if (opts.tol >= 0.0) {
        res.threshold = opts.tol;
    } else {
        std::vector<double> sorted(res.scores.data(),
                                   res.scores.data() + res.scores.size());
        std::sort(sorted.begin(), sorted.end());
        const auto n = static_cast<std::size_t>(res.scores.size());
        auto rank = static_cast<std::size_t>(
            std::ceil(opts.quantile * static_cast<double>(n)));
        rank = std::clamp<std::size_t>(rank, 1, n);
        res.threshold = sorted[rank - 1];
    }
    for (Index i = 0; i < res.scores.size(); ++i)
        if (res.scores[i] <= res.threshold)
            res.selected.push_back(static_cast<int>(i));
    return res;
}

}  // namespace kdx

#include "kdx/model_select.hpp"

#include <limits>

#include "kdx/errors.hpp"
#include "kdx/gpr.hpp"
#include "kdx/rng.hpp"

namespace kdx {

namespace {

void take_rows(const Matrix& x, const Vector& y, const std::vector<int>& idx,
               Matrix& xs, Vector& ys) {
    xs.resize(static_cast<Index>(idx.size()), x.cols());
    ys.resize(static_cast<Index>(idx.size()));
    for (Index r = 0; r < xs.rows(); ++r) {
        xs.row(r) = x.row(idx[static_cast<std::size_t>(r)]);
        ys[r] = y[idx[static_cast<std::size_t>(r)]];
    }
}

void check_grid_inputs(const Matrix& x, const Vector& y, int folds,
                       std::size_t grid_a, std::size_t grid_b) {
    if (x.rows() == 0) throw EmptyInput("model_select: empty training data");
    if (x.rows() != y.size())
        throw SampleCountMismatch("model_select: x and y row counts differ");
    if (folds < 2 || folds > x.rows())
        throw ConfigError("model_select: folds must lie in [2, n]");
    if (grid_a == 0 || grid_b == 0)
        throw ConfigError("model_select: empty parameter grid");
}

}  // namespace

std::vector<std::pair<std::vector<int>, std::vector<int>>> kfold_indices(
    int n, int folds, std::uint64_t seed) {
    if (n < 1) throw ConfigError("kfold: n must be >= 1");
    if (folds < 2 || folds > n)
        throw ConfigError("kfold: folds must lie in [2, n]");
    Rng rng(seed);
    const auto order = rng.permutation(n);

    std::vector<std::pair<std::vector<int>, std::vector<int>>> splits(
        static_cast<std::size_t>(folds));
    for (int i = 0; i < n; ++i) {
        const int fold = i % folds;
        for (int f = 0; f < folds; ++f) {
            auto& split = splits[static_cast<std::size_t>(f)];
            (f == fold ? split.second : split.first)
                .push_back(order[static_cast<std::size_t>(i)]);
        }
    }
    return splits;
}

SvmGridResult svm_select_rbf(const Matrix& x, const Vector& y,
                             const std::vector<double>& c_grid,
                             const std::vector<double>& gamma_grid, int folds,
                             std::uint64_t seed,
                             const SvmTrainOptions& base_opts) {
    check_grid_inputs(x, y, folds, c_grid.size(), gamma_grid.size());
    const auto splits = kfold_indices(static_cast<int>(x.rows()), folds, seed);

    SvmGridResult best;
    best.accuracy = -1.0;
    for (double c : c_grid) {
        for (double gamma : gamma_grid) {
            SvmTrainOptions opts = base_opts;
            opts.c = c;
            double correct = 0.0, total = 0.0;
            for (const auto& [train_idx, val_idx] : splits) {
                Matrix xt, xv;
                Vector yt, yv;
                take_rows(x, y, train_idx, xt, yt);
                take_rows(x, y, val_idx, xv, yv);
                auto model = SvmModel::train(xt, yt, KernelSpec::rbf(gamma),
                                             opts);
                for (Index i = 0; i < xv.rows(); ++i)
                    if (model.predict(Vector(xv.row(i).transpose())) ==
                        static_cast<int>(yv[i]))
                        correct += 1.0;
                total += static_cast<double>(xv.rows());
            }
            const double acc = correct / total;
            if (acc > best.accuracy) {
                best.accuracy = acc;
                best.c = c;
                best.gamma = gamma;
            }
        }
    }
    return best;
}

GprGridResult gpr_select_rbf(const Matrix& x, const Vector& y,
                             const std::vector<double>& gamma_grid,
                             const std::vector<double>& noise_grid, int folds,
                             std::uint64_t seed) {
    check_grid_inputs(x, y, folds, gamma_grid.size(), noise_grid.size());
    const auto splits = kfold_indices(static_cast<int>(x.rows()), folds, seed);

    GprGridResult best;
    best.mse = std::numeric_limits<double>::infinity();
    for (double gamma : gamma_grid) {
        for (double noise : noise_grid) {
            double sq = 0.0, total = 0.0;
            for (const auto& [train_idx, val_idx] : splits) {
                Matrix xt, xv;
                Vector yt, yv;
                take_rows(x, y, train_idx, xt, yt);
                take_rows(x, y, val_idx, xv, yv);
                auto model =
                    GprModel::fit(xt, yt, KernelSpec::rbf(gamma), noise);
                const Vector pred = model.predict_mean(xv);
                sq += (pred - yv).squaredNorm();
                total += static_cast<double>(xv.rows());
            }
            const double mse = sq / total;
            if (mse < best.mse) {
                best.mse = mse;
                best.gamma = gamma;
                best.noise_var = noise;
            }
        }
    }
    return best;
}

}  // namespace kdx

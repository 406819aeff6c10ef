#pragma once

#include <cstdint>
#include <vector>

#include "kdx/kernels.hpp"
#include "kdx/svm.hpp"

namespace kdx {

// Shuffled k-fold split of 0..n-1; every index appears in exactly one
// validation fold.
std::vector<std::pair<std::vector<int>, std::vector<int>>> kfold_indices(
    int n, int folds, std::uint64_t seed);

struct SvmGridResult {
    double c = 1.0;
    double gamma = 1.0;
    double accuracy = 0.0;  // mean validation accuracy of the winner
};

// Grid-search (C, gamma) for an rbf SVM by k-fold cross-validated accuracy;
// ties break toward the earlier grid entry, so results are deterministic.
SvmGridResult svm_select_rbf(const Matrix& x, const Vector& y,
                             const std::vector<double>& c_grid,
                             const std::vector<double>& gamma_grid, int folds,
                             std::uint64_t seed,
                             const SvmTrainOptions& base_opts = {});

struct GprGridResult {
    double gamma = 1.0;
    double noise_var = 0.0;
    double mse = 0.0;  // mean validation MSE of the winner
};

// Grid-search (gamma, noise_var) for rbf GP regression by k-fold validation
// MSE.
GprGridResult gpr_select_rbf(const Matrix& x, const Vector& y,
                             const std::vector<double>& gamma_grid,
                             const std::vector<double>& noise_grid, int folds,
                             std::uint64_t seed);

}  // namespace kdx

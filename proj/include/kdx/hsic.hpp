#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kdx/kernels.hpp"

namespace kdx {

// Kernels for the two blocks; unset entries default to an rbf kernel with
// the median-heuristic gamma of the corresponding block. Only PSD families
// are accepted (ConfigError).
struct HsicConfig {
    std::optional<KernelSpec> kernel_x;
    std::optional<KernelSpec> kernel_y;

    std::pair<KernelSpec, KernelSpec> resolve(const Matrix& x,
                                              const Matrix& y) const;
};

// Biased V-statistic HSIC = (1/n^2) Tr(K H L H), H = I - 11'/n. Tiny
// negative round-off (>= -1e-12) is clamped to zero.
double hsic_value(const Matrix& x, const Matrix& y,
                  const HsicConfig& cfg = {});

// Which formula computes the per-sample gradient: the generic kernel-
// derivative route, the rbf Hadamard shortcut, or automatic (shortcut when
// the block kernel is rbf). Both routes agree to round-off; the shortcut is
// O(n^2 d) without per-pair gradient calls.
enum class HsicGradRoute { Auto, General, RbfHadamard };

struct HsicField {
    Matrix grad_x;     // n x dx, dHSIC/dx_i^q
    Matrix grad_y;     // n x dy
    Vector magnitude;  // per-sample 2-norm over both blocks
};

HsicField hsic_gradients(const Matrix& x, const Matrix& y,
                         const HsicConfig& cfg = {},
                         HsicGradRoute route = HsicGradRoute::Auto);

// Permutation test over row permutations of Y: p = (1 + #{perm >= observed})
// / (n_perm + 1). Requires n_perm >= 19 (ConfigError). Deterministic for a
// fixed seed regardless of `threads`.
double hsic_permutation_pvalue(const Matrix& x, const Matrix& y,
                               const HsicConfig& cfg, int n_perm,
                               std::uint64_t seed, int threads = 1);

enum class UnfoldDirection { Maximize, Minimize };

struct UnfoldOptions {
    UnfoldDirection direction = UnfoldDirection::Maximize;
    int iters = 100;
    // Step along the gradient; < 0 selects 0.1 / max|initial gradient|.
    double step = -1.0;
    int max_halvings = 20;
};

struct UnfoldTrace {
    std::vector<double> hsic;  // index 0 = initial value, then one per step
    Matrix x_final;
    Matrix y_final;
    bool stalled = false;  // backtracking exhausted after the first step
};

// Gradient flow on HSIC moving both blocks simultaneously. Kernel gammas
// are frozen from the *initial* data (median heuristic unless supplied).
// Each iteration starts from the base step and halves it (at most
// max_halvings times) until the objective is monotone in the chosen
// direction; exhaustion on the first iteration raises StepCollapse, later
// exhaustion ends the trajectory early.
UnfoldTrace hsic_unfold(const Matrix& x, const Matrix& y,
                        const HsicConfig& cfg, const UnfoldOptions& opts);

}  // namespace kdx

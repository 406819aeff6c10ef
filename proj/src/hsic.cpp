#include "kdx/hsic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <utility>
#include <vector>

#include "kdx/detail/parallel.hpp"
#include "kdx/errors.hpp"
#include "kdx/rng.hpp"

namespace kdx {

namespace {

void check_blocks(const Matrix& x, const Matrix& y) {
    if (x.rows() == 0 || x.cols() == 0 || y.cols() == 0)
        throw EmptyInput("hsic: empty block");
    if (x.rows() != y.rows())
        throw SampleCountMismatch("hsic: x has " + std::to_string(x.rows()) +
                                  " rows but y has " + std::to_string(y.rows()));
    if (x.rows() < 2) throw ConfigError("hsic: need at least 2 samples");
    if (!x.allFinite() || !y.allFinite())
        throw NonFiniteInput("hsic: blocks contain non-finite values");
}

KernelSpec resolve_one(const std::optional<KernelSpec>& spec,
                       const Matrix& block) {
    KernelSpec k = spec ? *spec : KernelSpec::rbf(median_heuristic_gamma(block));
    k.validate(block.cols());
    if (!k.psd())
        throw ConfigError("hsic: kernel family '" + family_name(k.family) +
                          "' is not positive semi-definite");
    return k;
}

// Doubly centered copy: (H a H)_ij = a_ij - rowmean_i - colmean_j + mean.
Matrix center(const Matrix& a) {
    const Vector rm = a.rowwise().mean();
    const Vector cm = a.colwise().mean().transpose();
    const double g = a.mean();
    Matrix c = a;
    c.colwise() -= rm;
    c.rowwise() -= cm.transpose();
    c.array() += g;
    return c;
}

double value_from_grams(const Matrix& k, const Matrix& l) {
    const auto n = static_cast<double>(k.rows());
    double v = center(k).cwiseProduct(l).sum() / (n * n);
    if (v < 0.0 && v >= -1e-12) v = 0.0;
    return v;
}

// Per-sample gradient of the value w.r.t. one block: row i holds
// (2/n^2) sum_j A_ij d/d(first arg) k(b_i, b_j) with A the centered Gram of
// the *other* block.
Matrix block_gradient(const Matrix& block, const KernelSpec& spec,
                      const Matrix& own_gram, const Matrix& centered_other,
                      HsicGradRoute route) {
    if (route == HsicGradRoute::Auto)
        route = spec.family == KernelFamily::Rbf ? HsicGradRoute::RbfHadamard
                                                 : HsicGradRoute::General;
    const Index n = block.rows();
    const double scale = 2.0 / (static_cast<double>(n) * static_cast<double>(n));

    if (route == HsicGradRoute::RbfHadamard) {
        if (spec.family != KernelFamily::Rbf)
            throw ConfigError("hsic: the Hadamard shortcut requires an rbf "
                              "kernel, got '" + family_name(spec.family) + "'");
        // d/dx_i k(x_i, x_j) = -2 gamma (x_i - x_j) K_ij, so the row sums
        // collapse into two matrix products with W = A .* K.
        const Matrix w = centered_other.cwiseProduct(own_gram);
        const Vector s = w.rowwise().sum();
        return (-2.0 * spec.gamma * scale) *
               (s.asDiagonal() * block - w * block);
    }

    Matrix grad = Matrix::Zero(n, block.cols());
    for (Index i = 0; i < n; ++i) {
        const Vector bi = block.row(i).transpose();
        Vector acc = Vector::Zero(block.cols());
        for (Index j = 0; j < n; ++j)
            acc += centered_other(i, j) *
                   kernel_grad_x(spec, bi, Vector(block.row(j).transpose()));
        grad.row(i) = scale * acc.transpose();
    }
    return grad;
}

struct Resolved {
    KernelSpec kx;
    KernelSpec ky;
    Matrix k;
    Matrix l;
};

Resolved prepare(const Matrix& x, const Matrix& y, const HsicConfig& cfg) {
    check_blocks(x, y);
    auto [kx, ky] = cfg.resolve(x, y);
    Matrix k = gram(kx, x);
    Matrix l = gram(ky, y);
    return {std::move(kx), std::move(ky), std::move(k), std::move(l)};
}

}  // namespace

std::pair<KernelSpec, KernelSpec> HsicConfig::resolve(const Matrix& x,
                                                      const Matrix& y) const {
    return {resolve_one(kernel_x, x), resolve_one(kernel_y, y)};
}

double hsic_value(const Matrix& x, const Matrix& y, const HsicConfig& cfg) {
    const Resolved r = prepare(x, y, cfg);
    return value_from_grams(r.k, r.l);
}

HsicField hsic_gradients(const Matrix& x, const Matrix& y,
                         const HsicConfig& cfg, HsicGradRoute route) {
    const Resolved r = prepare(x, y, cfg);
    HsicField field;
    field.grad_x = block_gradient(x, r.kx, r.k, center(r.l), route);
    field.grad_y = block_gradient(y, r.ky, r.l, center(r.k), route);
    field.magnitude.resize(x.rows());
    for (Index i = 0; i < x.rows(); ++i)
        field.magnitude[i] = std::sqrt(field.grad_x.row(i).squaredNorm() +
                                       field.grad_y.row(i).squaredNorm());
    return field;
}

double hsic_permutation_pvalue(const Matrix& x, const Matrix& y,
                               const HsicConfig& cfg, int n_perm,
                               std::uint64_t seed, int threads) {
    if (n_perm < 19)
        throw ConfigError("hsic: permutation test needs n_perm >= 19");
    const Resolved r = prepare(x, y, cfg);
    const Matrix kc = center(r.k);
    const Index n = x.rows();
    const auto n2 = static_cast<double>(n) * static_cast<double>(n);
    const double observed = value_from_grams(r.k, r.l);

    std::atomic<long> count{0};
    detail::parallel_for(n_perm, threads, [&](Index p) {
        // One self-contained RNG per permutation keeps the draw identical
        // for every thread partition.
        Rng rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(p) + 1);
        const auto perm = rng.permutation(static_cast<int>(n));
        double v = 0.0;
        for (Index i = 0; i < n; ++i) {
            const Index pi = perm[static_cast<std::size_t>(i)];
            for (Index j = 0; j < n; ++j)
                v += kc(pi, perm[static_cast<std::size_t>(j)]) * r.l(i, j);
        }
        v /= n2;
        if (v < 0.0 && v >= -1e-12) v = 0.0;
        if (v >= observed) count.fetch_add(1, std::memory_order_relaxed);
    });
    return (1.0 + static_cast<double>(count.load())) /
           (static_cast<double>(n_perm) + 1.0);
}

UnfoldTrace hsic_unfold(const Matrix& x, const Matrix& y,
                        const HsicConfig& cfg, const UnfoldOptions& opts) {
    check_blocks(x, y);
    if (opts.iters < 1) throw ConfigError("hsic: unfold needs iters >= 1");
    if (opts.max_halvings < 0)
        throw ConfigError("hsic: max_halvings must be >= 0");

    // Freeze the kernels against the initial layout; the flow must not chase
    // a moving bandwidth.
    HsicConfig frozen;
    std::tie(frozen.kernel_x, frozen.kernel_y) = cfg.resolve(x, y);

    UnfoldTrace trace;
    trace.x_final = x;
    trace.y_final = y;
    trace.hsic.push_back(hsic_value(x, y, frozen));

    HsicField field = hsic_gradients(x, y, frozen, HsicGradRoute::Auto);
    const double gmax = std::max(field.grad_x.cwiseAbs().maxCoeff(),
                                 field.grad_y.cwiseAbs().maxCoeff());
    if (gmax == 0.0) return trace;

    const double base = opts.step > 0.0 ? opts.step : 0.1 / gmax;
    const double sign =
        opts.direction == UnfoldDirection::Maximize ? 1.0 : -1.0;
    const bool maximize = opts.direction == UnfoldDirection::Maximize;

    for (int it = 1; it <= opts.iters; ++it) {
        if (it > 1)
            field = hsic_gradients(trace.x_final, trace.y_final, frozen,
                                   HsicGradRoute::Auto);
        double step = base;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
            const Matrix xc = trace.x_final + sign * step * field.grad_x;
            const Matrix yc = trace.y_final + sign * step * field.grad_y;
            const double v = hsic_value(xc, yc, frozen);
            const bool ok = maximize ? v >= trace.hsic.back()
                                     : v <= trace.hsic.back();
            if (ok) {
                trace.x_final = xc;
                trace.y_final = yc;
                trace.hsic.push_back(v);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (it == 1)
                throw StepCollapse(
                    "hsic: unfold cannot make a monotone first step");
            trace.stalled = true;
            break;
        }
    }
    return trace;
}

}  // namespace kdx

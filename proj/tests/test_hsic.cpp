#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <kdx/hsic.hpp>
#include <kdx/rng.hpp>

#include "support/fd.hpp"
#include "support/kernel_cases.hpp"

using kdx::HsicConfig;
using kdx::HsicGradRoute;
using kdx::Index;
using kdx::KernelSpec;
using kdx::Matrix;
using kdx::UnfoldDirection;
using kdx::UnfoldOptions;
using kdx::Vector;
using testsupport::close;

namespace {

HsicConfig pinned(double gx, double gy) {
    HsicConfig cfg;
    cfg.kernel_x = KernelSpec::rbf(gx);
    cfg.kernel_y = KernelSpec::rbf(gy);
    return cfg;
}

// Correlated pair: y = x + small noise.
void dependent_blocks(int n, kdx::Rng& rng, Matrix& x, Matrix& y) {
    x.resize(n, 1);
    y.resize(n, 1);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.uniform(-2.0, 2.0);
        y(i, 0) = x(i, 0) + 0.05 * rng.normal();
    }
}

void independent_blocks(int n, kdx::Rng& rng, Matrix& x, Matrix& y) {
    x.resize(n, 1);
    y.resize(n, 1);
    for (int i = 0; i < n; ++i) x(i, 0) = rng.uniform(-2.0, 2.0);
    for (int i = 0; i < n; ++i) y(i, 0) = rng.uniform(-2.0, 2.0);
}

}  // namespace

TEST_CASE("two-sample value matches the closed form") {
    Matrix x(2, 1), y(2, 1);
    x << 0.0, 1.2;
    y << -0.3, 0.4;
    const double gx = 0.8, gy = 1.7;
    const double a = std::exp(-gx * 1.2 * 1.2);
    const double b = std::exp(-gy * 0.7 * 0.7);
    CHECK(kdx::hsic_value(x, y, pinned(gx, gy)) ==
          doctest::Approx((1.0 - a) * (1.0 - b) / 4.0).epsilon(1e-12));
}

TEST_CASE("constant block forces the value to zero") {
    kdx::Rng rng(301);
    Matrix x = testsupport::random_points(12, 2, rng);
    Matrix y = Matrix::Constant(12, 1, 0.7);
    CHECK(kdx::hsic_value(x, y, pinned(1.0, 1.0)) <= 1e-12);
    CHECK(kdx::hsic_value(x, y, pinned(1.0, 1.0)) >= 0.0);
}

TEST_CASE("value is invariant under a joint row permutation") {
    kdx::Rng rng(303);
    Matrix x, y;
    dependent_blocks(15, rng, x, y);
    const double base = kdx::hsic_value(x, y, pinned(0.9, 1.1));

    auto perm = rng.permutation(15);
    Matrix xp(15, 1), yp(15, 1);
    for (int i = 0; i < 15; ++i) {
        xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
        yp.row(i) = y.row(perm[static_cast<std::size_t>(i)]);
    }
    CHECK(close(kdx::hsic_value(xp, yp, pinned(0.9, 1.1)), base, 1e-12, 1e-15));
}

TEST_CASE("default kernels are rbf with the median-heuristic gamma") {
    kdx::Rng rng(305);
    Matrix x, y;
    dependent_blocks(20, rng, x, y);
    HsicConfig defaults;
    HsicConfig explicit_cfg =
        pinned(kdx::median_heuristic_gamma(x), kdx::median_heuristic_gamma(y));
    CHECK(kdx::hsic_value(x, y, defaults) ==
          kdx::hsic_value(x, y, explicit_cfg));
}

TEST_CASE("gradients match finite differences of the value") {
    kdx::Rng rng(307);
    Matrix x = testsupport::random_points(10, 2, rng);
    Matrix y = testsupport::random_points(10, 1, rng);
    // Couple the blocks so the value is safely away from the zero clamp.
    y.col(0) += 0.8 * x.col(0);

    HsicConfig cfg;
    cfg.kernel_x = KernelSpec::rbf(0.7);
    cfg.kernel_y = KernelSpec::poly(0.4, 1.0, 2);

    auto field = kdx::hsic_gradients(x, y, cfg, HsicGradRoute::General);
    const double h = 1e-5;
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index q = 0; q < x.cols(); ++q) {
            Matrix xp = x, xm = x;
            xp(i, q) += h;
            xm(i, q) -= h;
            const double numeric = (kdx::hsic_value(xp, y, cfg) -
                                    kdx::hsic_value(xm, y, cfg)) /
                                   (2.0 * h);
            CHECK(close(field.grad_x(i, q), numeric, 1e-5, 1e-9));
        }
        Matrix yp = y, ym = y;
        yp(i, 0) += h;
        ym(i, 0) -= h;
        const double numeric =
            (kdx::hsic_value(x, yp, cfg) - kdx::hsic_value(x, ym, cfg)) /
            (2.0 * h);
        CHECK(close(field.grad_y(i, 0), numeric, 1e-5, 1e-9));
    }
}

TEST_CASE("rbf shortcut agrees with the generic derivative route") {
    kdx::Rng rng(311);
    Matrix x = testsupport::random_points(14, 3, rng);
    Matrix y = testsupport::random_points(14, 2, rng);
    y.col(0) += x.col(1);
    HsicConfig cfg = pinned(0.6, 1.4);

    auto general = kdx::hsic_gradients(x, y, cfg, HsicGradRoute::General);
    auto shortcut = kdx::hsic_gradients(x, y, cfg, HsicGradRoute::RbfHadamard);
    CHECK((general.grad_x - shortcut.grad_x).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((general.grad_y - shortcut.grad_y).cwiseAbs().maxCoeff() <= 1e-10);

    // Auto resolves to the shortcut for rbf blocks.
    auto auto_route = kdx::hsic_gradients(x, y, cfg, HsicGradRoute::Auto);
    CHECK((auto_route.grad_x - shortcut.grad_x).cwiseAbs().maxCoeff() == 0.0);

    for (Index i = 0; i < x.rows(); ++i) {
        const double expect = std::sqrt(general.grad_x.row(i).squaredNorm() +
                                        general.grad_y.row(i).squaredNorm());
        CHECK(general.magnitude[i] == expect);
    }
}

TEST_CASE("the shortcut refuses non-rbf kernels") {
    kdx::Rng rng(313);
    Matrix x, y;
    dependent_blocks(8, rng, x, y);
    HsicConfig cfg;
    cfg.kernel_x = KernelSpec::poly(0.5, 1.0, 2);
    cfg.kernel_y = KernelSpec::rbf(1.0);
    CHECK_THROWS_AS(kdx::hsic_gradients(x, y, cfg, HsicGradRoute::RbfHadamard),
                    kdx::ConfigError);
}

TEST_CASE("permutation test separates dependent from independent data") {
    kdx::Rng rng(317);
    Matrix xd, yd, xi, yi;
    dependent_blocks(40, rng, xd, yd);
    independent_blocks(40, rng, xi, yi);

    const double p_dep = kdx::hsic_permutation_pvalue(xd, yd, {}, 99, 5);
    const double p_ind = kdx::hsic_permutation_pvalue(xi, yi, {}, 99, 5);
    CHECK(p_dep <= 0.05);
    CHECK(p_ind > 0.05);

    // Deterministic in the seed and independent of the thread count.
    CHECK(kdx::hsic_permutation_pvalue(xd, yd, {}, 99, 5) == p_dep);
    CHECK(kdx::hsic_permutation_pvalue(xd, yd, {}, 99, 5, 4) == p_dep);
    CHECK(kdx::hsic_permutation_pvalue(xd, yd, {}, 99, 7) > 0.0);

    CHECK_THROWS_AS(kdx::hsic_permutation_pvalue(xd, yd, {}, 18, 5),
                    kdx::ConfigError);
}

TEST_CASE("maximizing unfold grows the value monotonically") {
    kdx::Rng rng(319);
    Matrix x, y;
    dependent_blocks(25, rng, x, y);
    UnfoldOptions opts;
    opts.direction = UnfoldDirection::Maximize;
    opts.iters = 60;
    auto trace = kdx::hsic_unfold(x, y, {}, opts);

    REQUIRE(trace.hsic.size() >= 2);
    for (std::size_t t = 1; t < trace.hsic.size(); ++t)
        CHECK(trace.hsic[t] >= trace.hsic[t - 1]);
    CHECK(trace.hsic.back() >= 1.2 * trace.hsic.front());
    CHECK(trace.x_final.rows() == 25);
    CHECK(trace.y_final.rows() == 25);
}

TEST_CASE("minimizing unfold shrinks the value monotonically") {
    kdx::Rng rng(323);
    Matrix x, y;
    dependent_blocks(25, rng, x, y);
    UnfoldOptions opts;
    opts.direction = UnfoldDirection::Minimize;
    opts.iters = 60;
    auto trace = kdx::hsic_unfold(x, y, {}, opts);

    REQUIRE(trace.hsic.size() >= 2);
    for (std::size_t t = 1; t < trace.hsic.size(); ++t)
        CHECK(trace.hsic[t] <= trace.hsic[t - 1]);
    CHECK(trace.hsic.back() <= 0.8 * trace.hsic.front());
}

TEST_CASE("an exactly stationary start returns the initial trace") {
    Matrix x = Matrix::Constant(6, 1, 0.3);
    Matrix y = Matrix::Constant(6, 1, -1.0);
    UnfoldOptions opts;
    opts.iters = 10;
    auto trace = kdx::hsic_unfold(x, y, pinned(1.0, 1.0), opts);
    CHECK(trace.hsic.size() == 1);
    CHECK(trace.hsic[0] == 0.0);
    CHECK((trace.x_final - x).cwiseAbs().maxCoeff() == 0.0);
    CHECK_FALSE(trace.stalled);
}

TEST_CASE("a hopeless first step raises a step collapse") {
    kdx::Rng rng(329);
    Matrix x, y;
    independent_blocks(20, rng, x, y);
    UnfoldOptions opts;
    opts.direction = UnfoldDirection::Minimize;
    opts.step = 1e12;
    opts.max_halvings = 0;
    CHECK_THROWS_AS(kdx::hsic_unfold(x, y, pinned(1.0, 1.0), opts),
                    kdx::StepCollapse);
}

TEST_CASE("hsic input validation") {
    Matrix x = Matrix::Zero(4, 1);
    Matrix y = Matrix::Zero(3, 1);
    CHECK_THROWS_AS(kdx::hsic_value(x, y, pinned(1.0, 1.0)),
                    kdx::SampleCountMismatch);
    CHECK_THROWS_AS(kdx::hsic_value(Matrix(0, 1), Matrix(0, 1), {}),
                    kdx::EmptyInput);

    Matrix bad = Matrix::Zero(4, 1);
    bad(2, 0) = std::nan("");
    CHECK_THROWS_AS(kdx::hsic_value(bad, Matrix::Zero(4, 1), pinned(1, 1)),
                    kdx::NonFiniteInput);

    HsicConfig cfg;
    cfg.kernel_x = KernelSpec::tanh(1.0, 0.0);
    CHECK_THROWS_AS(kdx::hsic_value(Matrix::Zero(4, 1), Matrix::Zero(4, 1), cfg),
                    kdx::ConfigError);
}

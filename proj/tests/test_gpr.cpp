#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <kdx/gpr.hpp>
#include <kdx/rng.hpp>

#include "support/fd.hpp"
#include "support/kernel_cases.hpp"

using kdx::GprModel;
using kdx::KernelSpec;
using kdx::Matrix;
using kdx::Vector;
using testsupport::close;

namespace {

Matrix col(std::initializer_list<double> xs) {
    Matrix m(static_cast<kdx::Index>(xs.size()), 1);
    kdx::Index i = 0;
    for (double v : xs) m(i++, 0) = v;
    return m;
}

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<kdx::Index>(xs.size()));
    kdx::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("two-point rbf fit reproduces the hand-solved coefficients") {
    Matrix x = col({0.0, 1.0});
    Vector y = vec({1.0, 1.0});
    auto model = GprModel::fit(x, y, KernelSpec::rbf(1.0), 0.0, 0.0);

    // K = [[1, e^-1], [e^-1, 1]], y = (1,1) -> alpha = (1,1)/(1+e^-1).
    const double expected = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(model.alpha()[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(model.alpha()[1] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("noise-free fit interpolates the training targets") {
    kdx::Rng rng(3);
    const int n = 30;
    Matrix x(n, 1);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = -3.0 + 6.0 * (i + rng.uniform()) / n;
        y[i] = std::sin(2.0 * x(i, 0)) + 0.2 * x(i, 0);
    }
    // Noise-free interpolation wants minimal regularization: start the
    // jitter ladder far below the default (it still escalates if needed).
    auto model = GprModel::fit(x, y, KernelSpec::rbf(1.0), 0.0, 1e-13);
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(model.predict_mean(Vector(x.row(i).transpose())) -
                       y[i]) <= 1e-6);
}

TEST_CASE("posterior variance: zero at training points, prior far away") {
    Matrix x = col({0.0});
    Vector y = vec({1.0});
    auto model = GprModel::fit(x, y, KernelSpec::rbf(0.5), 0.1);

    // Far from the data k* ~ 0 so var -> noise_var + k** = 0.1 + 1.
    CHECK(model.predict_var(vec({10.0})) ==
          doctest::Approx(1.1).epsilon(1e-10));

    // Noise-free model: variance at a training input collapses to ~0.
    auto clean = GprModel::fit(x, y, KernelSpec::rbf(0.5), 0.0);
    const double v = clean.predict_var(vec({0.0}));
    CHECK(v >= 0.0);
    CHECK(v <= 1e-8);
}

TEST_CASE("posterior variance is never negative") {
    kdx::Rng rng(17);
    Matrix x = testsupport::random_points(25, 2, rng);
    Vector y(25);
    for (int i = 0; i < 25; ++i) y[i] = rng.normal();
    auto model = GprModel::fit(x, y, KernelSpec::rbf(1.5), 0.0);
    for (int t = 0; t < 50; ++t) {
        Vector p = testsupport::random_point(2, rng);
        CHECK(model.predict_var(p) >= 0.0);
    }
}

TEST_CASE("single-point model: gradient and hessian diagonal closed forms") {
    Matrix x = Matrix::Zero(1, 2);
    Vector y = vec({1.0});
    auto model = GprModel::fit(x, y, KernelSpec::rbf(0.5), 0.0, 0.0);
    CHECK(model.alpha()[0] == doctest::Approx(1.0).epsilon(1e-12));

    // grad mu(x*) = alpha * dk/dx* = -2*gamma*(x*-0)*k.
    Vector g = model.mean_gradient(vec({1.0, 0.0}));
    CHECK(g[0] == doctest::Approx(-std::exp(-0.5)).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(0.0));

    // At the training point the rbf second partial is -2*gamma.
    Vector h = model.mean_hessian_diag(vec({0.0, 0.0}));
    CHECK(h[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(h[1] == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("mean gradient and hessian diagonal match finite differences") {
    kdx::Rng rng(23);
    const std::vector<KernelSpec> kernels = {
        KernelSpec::rbf(0.8),
        KernelSpec::poly(0.5, 1.0, 3),
        KernelSpec::ard({0.9, 1.4, 0.7}, 1.1),
        KernelSpec::linear(),
    };
    Matrix x = testsupport::random_points(15, 3, rng);
    Vector y(15);
    for (int i = 0; i < 15; ++i) y[i] = rng.normal();

    for (const auto& spec : kernels) {
        auto model = GprModel::fit(x, y, spec, 0.05);
        for (int t = 0; t < 5; ++t) {
            Vector p = testsupport::random_point(3, rng);
            auto f = [&](const Vector& q) { return model.predict_mean(q); };
            Vector analytic = model.mean_gradient(p);
            Vector numeric = testsupport::fd_gradient(f, p);
            for (int j = 0; j < 3; ++j)
                CHECK(close(analytic[j], numeric[j], 1e-5, 1e-8));

            Vector hd = model.mean_hessian_diag(p);
            for (int j = 0; j < 3; ++j) {
                auto gj = [&](const Vector& q) {
                    return model.mean_gradient(q)[j];
                };
                CHECK(close(hd[j], testsupport::fd_partial(gj, p, j), 1e-5,
                            1e-8));
            }
        }
    }
}

TEST_CASE("gradient field stacks per-point gradients") {
    kdx::Rng rng(29);
    Matrix x = testsupport::random_points(10, 2, rng);
    Vector y(10);
    for (int i = 0; i < 10; ++i) y[i] = rng.normal();
    auto model = GprModel::fit(x, y, KernelSpec::rbf(1.0), 0.1);

    Matrix probe = testsupport::random_points(6, 2, rng);
    auto field = model.mean_gradient_field(probe);
    CHECK(field.values.rows() == 6);
    for (int i = 0; i < 6; ++i) {
        Vector g = model.mean_gradient(probe.row(i).transpose());
        CHECK((field.values.row(i).transpose() - g).cwiseAbs().maxCoeff() ==
              0.0);
    }
}

TEST_CASE("regularizer norms on a single-sample model") {
    Matrix x = Matrix::Zero(1, 2);
    Vector y = vec({2.0});
    auto model = GprModel::fit(x, y, KernelSpec::rbf(0.5), 0.0, 0.0);
    auto norms = model.regularizer_norms();

    // alpha = 2 (K = [1]): h = a'Ka = 4 and ||f||^2 at the sample is 4; the
    // rbf gradient vanishes at its own center.
    CHECK(norms.h_norm == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(norms.l2_norm == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(norms.grad_norm == doctest::Approx(0.0));
    // Both second partials of exp(-0.5 r^2) at r=0 are -1, so the Laplacian
    // is (-1 - 1) * alpha = -4, squared 16.
    CHECK(norms.lap_norm == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("h_norm shrinks monotonically with noise variance") {
    kdx::Rng rng(31);
    Matrix x = testsupport::random_points(20, 2, rng);
    Vector y(20);
    for (int i = 0; i < 20; ++i) y[i] = rng.normal();

    double prev = std::numeric_limits<double>::infinity();
    for (double nv : {0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
        auto model = GprModel::fit(x, y, KernelSpec::rbf(1.0), nv);
        const double h = model.regularizer_norms().h_norm;
        CHECK(h <= prev * (1.0 + 1e-12));
        prev = h;
    }
}

TEST_CASE("gpr JSON round trip preserves predictions") {
    kdx::Rng rng(37);
    Matrix x = testsupport::random_points(12, 2, rng);
    Vector y(12);
    for (int i = 0; i < 12; ++i) y[i] = rng.normal();
    auto model = GprModel::fit(x, y, KernelSpec::ard({1.2, 0.8}, 1.5), 0.05);

    auto restored = GprModel::from_json(model.to_json());
    for (int t = 0; t < 10; ++t) {
        Vector p = testsupport::random_point(2, rng);
        CHECK(restored.predict_mean(p) ==
              doctest::Approx(model.predict_mean(p)).epsilon(1e-12));
        CHECK(restored.predict_var(p) ==
              doctest::Approx(model.predict_var(p)).epsilon(1e-12));
    }
}

TEST_CASE("gpr fit input validation") {
    Matrix x = col({0.0, 1.0});
    CHECK_THROWS_AS(
        GprModel::fit(x, vec({1.0}), KernelSpec::rbf(1.0), 0.0),
        kdx::SampleCountMismatch);
    CHECK_THROWS_AS(
        GprModel::fit(x, vec({1.0, 2.0}), KernelSpec::rbf(1.0), -0.5),
        kdx::ConfigError);
    CHECK_THROWS_AS(
        GprModel::fit(Matrix(0, 1), Vector(0), KernelSpec::rbf(1.0), 0.0),
        kdx::EmptyInput);
    Vector bad = vec({1.0, std::nan("")});
    CHECK_THROWS_AS(GprModel::fit(x, bad, KernelSpec::rbf(1.0), 0.0),
                    kdx::NonFiniteInput);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <kdx/density.hpp>
#include <kdx/linalg.hpp>
#include <kdx/rng.hpp>

#include "support/fd.hpp"
#include "support/kernel_cases.hpp"

using kdx::DensityMode;
using kdx::DensityModel;
using kdx::Index;
using kdx::KernelSpec;
using kdx::Matrix;
using kdx::RidgeOptions;
using kdx::Vector;
using testsupport::close;

namespace {

Vector vec1(double x) {
    Vector v(1);
    v[0] = x;
    return v;
}

Vector vec2(double a, double b) {
    Vector v(2);
    v[0] = a;
    v[1] = b;
    return v;
}

// Mirror-symmetric elongated cloud around the x1 axis: every sample (a, b)
// is paired with (a, -b), so densities fit on it are exactly even in x2.
Matrix symmetric_ribbon(int half, kdx::Rng& rng) {
    Matrix x(2 * half, 2);
    for (int i = 0; i < half; ++i) {
        const double a = rng.uniform(-2.0, 2.0);
        const double b = rng.uniform(0.05, 0.25);
        x(2 * i, 0) = a;
        x(2 * i, 1) = b;
        x(2 * i + 1, 0) = a;
        x(2 * i + 1, 1) = -b;
    }
    return x;
}

}  // namespace

TEST_CASE("parzen density matches the hand-written two-point sum") {
    Matrix x(2, 1);
    x << 0.0, 1.0;
    auto model = DensityModel::fit(x, KernelSpec::rbf(1.0), DensityMode::Parzen);

    auto expect = [](double t) {
        return 0.5 * (std::exp(-t * t) + std::exp(-(t - 1.0) * (t - 1.0)));
    };
    for (double t : {0.0, 0.3, 1.0, -0.7}) {
        CHECK(model.density_at(vec1(t)) ==
              doctest::Approx(expect(t)).epsilon(1e-14));
    }
}

TEST_CASE("density gradient and hessian agree with finite differences") {
    kdx::Rng rng(211);
    for (const auto family :
         {kdx::KernelFamily::Rbf, kdx::KernelFamily::Ard,
          kdx::KernelFamily::Poly}) {
        const Index d = 3;
        KernelSpec spec = testsupport::random_spec(family, d, rng);
        Matrix x = testsupport::random_points(12, d, rng);
        auto model = DensityModel::fit(x, spec, DensityMode::Parzen);

        for (int t = 0; t < 5; ++t) {
            Vector p = testsupport::random_point(d, rng);
            auto f = [&](const Vector& q) { return model.density_at(q); };
            Vector g = model.density_gradient(p);
            Vector g_fd = testsupport::fd_gradient(f, p);
            for (Index j = 0; j < d; ++j)
                CHECK(close(g[j], g_fd[j], 1e-5, 1e-8));

            Matrix h = model.density_hessian(p);
            for (Index j = 0; j < d; ++j) {
                auto gj = [&](const Vector& q) {
                    return model.density_gradient(q)[j];
                };
                Vector hj_fd = testsupport::fd_gradient(gj, p);
                for (Index k = 0; k < d; ++k) {
                    CHECK(close(h(j, k), hj_fd[k], 1e-5, 1e-8));
                    CHECK(h(j, k) == h(k, j));
                }
            }
        }
    }
}

TEST_CASE("full-rank spectral weights reduce to parzen") {
    kdx::Rng rng(223);
    Matrix x = testsupport::random_points(15, 2, rng);
    KernelSpec spec = KernelSpec::rbf(0.8);

    auto parzen = DensityModel::fit(x, spec, DensityMode::Parzen);
    auto keca = DensityModel::fit(x, spec, DensityMode::Keca, 15);
    auto entropy = DensityModel::fit(x, spec, DensityMode::EntropyKeca, 15);

    CHECK((keca.weights() - parzen.weights()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((entropy.weights() - parzen.weights()).cwiseAbs().maxCoeff() <=
          1e-10);
    for (int t = 0; t < 10; ++t) {
        Vector p = testsupport::random_point(2, rng);
        CHECK(close(keca.density_at(p), parzen.density_at(p), 1e-10, 1e-12));
    }
}

TEST_CASE("truncated spectral weights match a direct eigendecomposition") {
    kdx::Rng rng(227);
    Matrix x = testsupport::random_points(8, 2, rng);
    KernelSpec spec = KernelSpec::rbf(1.3);
    const Index r = 3;
    auto model = DensityModel::fit(x, spec, DensityMode::Keca, r);

    auto es = kdx::sym_eig(kdx::SymMatrix(kdx::gram(spec, x)));
    Matrix er = es.vectors.leftCols(r);
    Vector expected = er * (er.transpose() * Vector::Ones(8)) / 8.0;
    CHECK((model.weights() - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("entropy ranking can pick different eigenpairs than eigenvalue rank") {
    // Two interacting mirrored pairs around the origin plus a far singleton.
    // The antisymmetric pair-sum mode carries the second-largest eigenvalue
    // but is orthogonal to the ones vector, so it contributes nothing to the
    // information potential; the entropy ranking skips it in favour of the
    // singleton mode.
    Matrix x(5, 1);
    x << -1.05, -0.95, 0.95, 1.05, 5.0;
    KernelSpec spec = KernelSpec::rbf(1.0);

    auto es = kdx::sym_eig(kdx::SymMatrix(kdx::gram(spec, x)));
    Vector ones = Vector::Ones(5);
    Vector contrib(5);
    for (Index i = 0; i < 5; ++i) {
        const double proj = es.vectors.col(i).dot(ones);
        contrib[i] = es.values[i] * proj * proj;
    }
    // The second-largest eigenpair must be (near) useless for the potential,
    // while the third still matters.
    CHECK(contrib[1] <= 1e-10);
    CHECK(contrib[2] > 0.5);

    const Index r = 2;
    auto keca = DensityModel::fit(x, spec, DensityMode::Keca, r);
    auto entropy = DensityModel::fit(x, spec, DensityMode::EntropyKeca, r);
    CHECK((keca.weights() - entropy.weights()).cwiseAbs().maxCoeff() > 1e-6);

    Matrix e13(5, 2);
    e13.col(0) = es.vectors.col(0);
    e13.col(1) = es.vectors.col(2);
    Vector expected = e13 * (e13.transpose() * ones) / 5.0;
    CHECK((entropy.weights() - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("explicit weights drive the mixture directly") {
    Matrix x(3, 1);
    x << 0.0, 1.0, 2.0;
    Vector w = Vector::Zero(3);
    w[0] = 1.0;
    DensityModel model(x, KernelSpec::rbf(0.5), DensityMode::Parzen, 0, w);
    for (double t : {0.2, 1.4}) {
        CHECK(model.density_at(vec1(t)) ==
              doctest::Approx(std::exp(-0.5 * t * t)).epsilon(1e-14));
    }
}

TEST_CASE("ridge scores vanish on the crest of a symmetric ribbon") {
    kdx::Rng rng(229);
    Matrix x = symmetric_ribbon(40, rng);
    auto model = DensityModel::fit(x, KernelSpec::rbf(0.6), DensityMode::Parzen);

    Matrix probes(6, 2);
    probes << -1.0, 0.0, 0.0, 0.0, 1.0, 0.0,  // on the crest
        -1.0, 0.9, 0.0, 1.1, 1.0, -0.8;       // clearly off it
    RidgeOptions opts;
    opts.r_ridge = 1;
    opts.tol = 0.05;
    auto res = kdx::ridge_scores(model, probes, opts);

    for (int i = 0; i < 3; ++i) CHECK(res.scores[i] <= 1e-8);
    for (int i = 3; i < 6; ++i) CHECK(res.scores[i] > 0.05);
    CHECK(res.selected == std::vector<int>({0, 1, 2}));
    CHECK(res.threshold == 0.05);

    // Projecting onto the top eigenvector instead captures the whole
    // gradient on the crest.
    RidgeOptions top = opts;
    top.top_subspace = true;
    auto res_top = kdx::ridge_scores(model, probes, top);
    for (int i = 0; i < 3; ++i) CHECK(res_top.scores[i] >= 0.99);
}

TEST_CASE("quantile selection uses the nearest-rank cut") {
    kdx::Rng rng(233);
    Matrix x = symmetric_ribbon(30, rng);
    auto model = DensityModel::fit(x, KernelSpec::rbf(0.6), DensityMode::Parzen);
    Matrix probes = testsupport::random_points(20, 2, rng);

    RidgeOptions opts;
    opts.r_ridge = 1;
    opts.quantile = 0.25;
    auto res = kdx::ridge_scores(model, probes, opts);

    std::vector<double> sorted(res.scores.data(),
                               res.scores.data() + res.scores.size());
    std::sort(sorted.begin(), sorted.end());
    const double expected_cut = sorted[4];  // ceil(0.25 * 20) = 5th smallest
    CHECK(res.threshold == expected_cut);
    for (int idx : res.selected) CHECK(res.scores[idx] <= res.threshold);
    CHECK(res.selected.size() >= 5);
}

TEST_CASE("density JSON round trip preserves evaluations") {
    kdx::Rng rng(239);
    Matrix x = testsupport::random_points(10, 2, rng);
    auto model = DensityModel::fit(x, KernelSpec::rbf(0.9), DensityMode::Keca, 4);
    auto restored = DensityModel::from_json(model.to_json());
    CHECK(restored.mode() == DensityMode::Keca);
    CHECK(restored.rank() == 4);
    for (int t = 0; t < 8; ++t) {
        Vector p = testsupport::random_point(2, rng);
        CHECK(restored.density_at(p) == model.density_at(p));
    }
}

TEST_CASE("density mode names round trip") {
    for (auto mode : {DensityMode::Parzen, DensityMode::Keca,
                      DensityMode::EntropyKeca}) {
        CHECK(kdx::density_mode_from_name(kdx::density_mode_name(mode)) ==
              mode);
    }
    CHECK_THROWS_AS(kdx::density_mode_from_name("gaussian"), kdx::ConfigError);
}

TEST_CASE("density input validation") {
    Matrix x(3, 1);
    x << 0.0, 1.0, 2.0;

    CHECK_THROWS_AS(
        DensityModel::fit(x, KernelSpec::tanh(1.0, 0.5), DensityMode::Parzen),
        kdx::ConfigError);
    CHECK_THROWS_AS(
        DensityModel::fit(x, KernelSpec::rbf(1.0), DensityMode::Keca, 0),
        kdx::InvalidRank);
    CHECK_THROWS_AS(
        DensityModel::fit(x, KernelSpec::rbf(1.0), DensityMode::Keca, 4),
        kdx::InvalidRank);
    CHECK_THROWS_AS(
        DensityModel::fit(Matrix(0, 1), KernelSpec::rbf(1.0),
                          DensityMode::Parzen),
        kdx::EmptyInput);

    Matrix bad = x;
    bad(1, 0) = std::nan("");
    CHECK_THROWS_AS(
        DensityModel::fit(bad, KernelSpec::rbf(1.0), DensityMode::Parzen),
        kdx::NonFiniteInput);

    auto model = DensityModel::fit(x, KernelSpec::rbf(1.0), DensityMode::Parzen);
    CHECK_THROWS_AS(model.density_at(vec2(0.0, 1.0)), kdx::DimensionMismatch);

    RidgeOptions opts;
    opts.r_ridge = 2;  // exceeds d = 1
    CHECK_THROWS_AS(kdx::ridge_scores(model, x, opts), kdx::InvalidRank);
    RidgeOptions bad_q;
    bad_q.quantile = 0.0;
    CHECK_THROWS_AS(kdx::ridge_scores(model, x, bad_q), kdx::ConfigError);
}

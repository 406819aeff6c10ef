#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <kdx/toydata.hpp>

using kdx::Matrix;
using kdx::ToyData;
using kdx::ToySpec;
using kdx::Vector;

namespace {

ToyData gen(const std::string& name, int n, double noise, std::uint64_t seed) {
    ToySpec spec;
    spec.name = name;
    spec.n = n;
    spec.noise = noise;
    spec.seed = seed;
    return kdx::generate_toy(spec);
}

}  // namespace

TEST_CASE("noise-free regression sets satisfy their defining equation") {
    struct Case {
        const char* name;
        double lo, hi;
        double (*f)(double);
    };
    const Case cases[] = {
        {"line", -3.0, 3.0, [](double x) { return x; }},
        {"parabola", -3.0, 3.0, [](double x) { return x * x; }},
        {"sine", -M_PI, M_PI, [](double x) { return std::sin(x); }},
        {"x_sin_x", -2.0 * M_PI, 2.0 * M_PI,
         [](double x) { return x * std::sin(x); }},
        {"line_plus_sine", -2.0 * M_PI, 2.0 * M_PI,
         [](double x) { return x + std::sin(x); }},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        auto data = gen(c.name, 64, 0.0, 11);
        REQUIRE(data.X.rows() == 64);
        REQUIRE(data.X.cols() == 1);
        REQUIRE(data.y.size() == 64);
        CHECK_FALSE(data.classification);
        for (int i = 0; i < 64; ++i) {
            CHECK(data.X(i, 0) >= c.lo);
            CHECK(data.X(i, 0) <= c.hi);
            CHECK(data.y[i] == doctest::Approx(c.f(data.X(i, 0))).epsilon(1e-12));
        }
    }
}

TEST_CASE("the stratified grid puts one abscissa per cell in order") {
    auto data = gen("line", 40, 0.0, 3);
    const double lo = -3.0, hi = 3.0, w = (hi - lo) / 40.0;
    for (int i = 0; i < 40; ++i) {
        CHECK(data.X(i, 0) >= lo + i * w);
        CHECK(data.X(i, 0) <= lo + (i + 1) * w);
    }
    CHECK(std::is_sorted(data.X.col(0).data(), data.X.col(0).data() + 40));
}

TEST_CASE("noise perturbs y but not the abscissas") {
    auto clean = gen("sine", 50, 0.0, 5);
    auto noisy = gen("sine", 50, 0.3, 5);
    CHECK((clean.X - noisy.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((clean.y - noisy.y).cwiseAbs().maxCoeff() > 0.0);
    // Same seed, same draw.
    auto again = gen("sine", 50, 0.3, 5);
    CHECK((noisy.y - again.y).cwiseAbs().maxCoeff() == 0.0);
    // Different seed, different draw.
    auto other = gen("sine", 50, 0.3, 6);
    CHECK((noisy.y - other.y).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("two moons interleave with balanced labels") {
    auto data = gen("two_moons", 80, 0.0, 7);
    REQUIRE(data.X.cols() == 2);
    CHECK(data.classification);
    int pos = 0;
    for (int i = 0; i < 80; ++i) {
        const double l = data.y[i];
        REQUIRE((l == 1.0 || l == -1.0));
        if (l == 1.0) {
            ++pos;
            // First moon: upper unit half-circle.
            const double r = std::hypot(data.X(i, 0), data.X(i, 1));
            CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(data.X(i, 1) >= -1e-12);
        } else {
            // Second moon: shifted mirrored half-circle.
            const double r =
                std::hypot(data.X(i, 0) - 1.0, data.X(i, 1) - 0.5);
            CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(data.X(i, 1) <= 0.5 + 1e-12);
        }
    }
    CHECK(pos == 40);
}

TEST_CASE("circles sit on their stated radii") {
    auto data = gen("circles", 60, 0.0, 9);
    CHECK(data.classification);
    for (int i = 0; i < 60; ++i) {
        const double r = std::hypot(data.X(i, 0), data.X(i, 1));
        if (data.y[i] == 1.0)
            CHECK(r == doctest::Approx(0.5).epsilon(1e-9));
        else
            CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("ellipsoids form two labeled gaussian blobs") {
    auto data = gen("ellipsoids", 100, 0.0, 13);
    CHECK(data.classification);
    CHECK(data.X.cols() == 2);
    Vector mean_pos = Vector::Zero(2), mean_neg = Vector::Zero(2);
    int npos = 0;
    for (int i = 0; i < 100; ++i) {
        if (data.y[i] == 1.0) {
            mean_pos += data.X.row(i).transpose();
            ++npos;
        } else {
            mean_neg += data.X.row(i).transpose();
        }
    }
    REQUIRE(npos == 50);
    mean_pos /= npos;
    mean_neg /= (100 - npos);
    // The blob centres are separated.
    CHECK((mean_pos - mean_neg).norm() > 1.0);
}

TEST_CASE("noisy ring radii concentrate around one") {
    auto data = gen("noisy_ring", 200, 0.05, 17);
    CHECK(data.y.size() == 0);
    CHECK_FALSE(data.classification);
    double mean_r = 0.0;
    for (int i = 0; i < 200; ++i)
        mean_r += std::hypot(data.X(i, 0), data.X(i, 1));
    mean_r /= 200.0;
    CHECK(std::abs(mean_r - 1.0) < 0.05);

    auto clean = gen("noisy_ring", 50, 0.0, 17);
    for (int i = 0; i < 50; ++i)
        CHECK(std::hypot(clean.X(i, 0), clean.X(i, 1)) ==
              doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sinusoid pair traces sin(3x)") {
    auto data = gen("sinusoid_pair", 120, 0.0, 19);
    CHECK(data.y.size() == 0);
    for (int i = 0; i < 120; ++i) {
        CHECK(data.X(i, 0) >= 0.0);
        CHECK(data.X(i, 0) < 2.0 * M_PI);
        CHECK(data.X(i, 1) ==
              doctest::Approx(std::sin(3.0 * data.X(i, 0))).epsilon(1e-12));
    }
}

TEST_CASE("piecewise plane switches slope at the x1 boundary") {
    auto data = gen("piecewise_plane", 150, 0.0, 23);
    REQUIRE(data.X.cols() == 2);
    bool saw_pos = false, saw_neg = false;
    for (int i = 0; i < 150; ++i) {
        const double x1 = data.X(i, 0), x2 = data.X(i, 1);
        CHECK(std::abs(x1) <= 20.0);
        CHECK(std::abs(x2) <= 20.0);
        const double expect = x1 >= 0.0 ? 5.0 * x1 + x2 : x1 + x2;
        CHECK(data.y[i] == doctest::Approx(expect).epsilon(1e-12));
        (x1 >= 0.0 ? saw_pos : saw_neg) = true;
    }
    CHECK(saw_pos);
    CHECK(saw_neg);
}

TEST_CASE("dataset name registry is complete and validated") {
    const auto& names = kdx::toy_dataset_names();
    CHECK(names.size() == 11);
    std::set<std::string> unique(names.begin(), names.end());
    CHECK(unique.size() == names.size());
    for (const auto& name : names) {
        auto data = gen(name, 12, 0.1, 1);
        CHECK(data.X.rows() == 12);
        CHECK(data.X.allFinite());
    }

    CHECK_THROWS_AS(gen("spiral", 10, 0.0, 1), kdx::UnknownDataset);
    CHECK_THROWS_AS(gen("line", 0, 0.0, 1), kdx::ConfigError);
    CHECK_THROWS_AS(gen("line", 10, -0.1, 1), kdx::ConfigError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include <kdx/model_select.hpp>
#include <kdx/toydata.hpp>

using kdx::Matrix;
using kdx::Vector;

TEST_CASE("kfold splits partition the index range") {
    const auto splits = kdx::kfold_indices(23, 4, 9);
    REQUIRE(splits.size() == 4);

    std::set<int> seen;
    for (const auto& [train, val] : splits) {
        CHECK(train.size() + val.size() == 23);
        for (int i : val) {
            CHECK(seen.insert(i).second);  // each index validates exactly once
            CHECK(std::find(train.begin(), train.end(), i) == train.end());
        }
    }
    CHECK(seen.size() == 23);

    // Deterministic in the seed.
    const auto again = kdx::kfold_indices(23, 4, 9);
    CHECK(again == splits);
    const auto other = kdx::kfold_indices(23, 4, 10);
    CHECK(other != splits);

    CHECK_THROWS_AS(kdx::kfold_indices(5, 1, 0), kdx::ConfigError);
    CHECK_THROWS_AS(kdx::kfold_indices(5, 6, 0), kdx::ConfigError);
}

TEST_CASE("svm grid search finds a separating configuration on two moons") {
    kdx::ToySpec spec;
    spec.name = "two_moons";
    spec.n = 80;
    spec.noise = 0.08;
    spec.seed = 21;
    auto data = kdx::generate_toy(spec);

    auto best = kdx::svm_select_rbf(data.X, data.y, {0.5, 5.0}, {0.5, 2.0, 8.0},
                                    4, 3);
    CHECK(best.accuracy >= 0.9);
    CHECK((best.c == 0.5 || best.c == 5.0));
    const std::set<double> gammas = {0.5, 2.0, 8.0};
    CHECK(gammas.count(best.gamma) == 1);
}

TEST_CASE("gpr grid search prefers a sane bandwidth on a sine") {
    kdx::ToySpec spec;
    spec.name = "sine";
    spec.n = 60;
    spec.noise = 0.05;
    spec.seed = 33;
    auto data = kdx::generate_toy(spec);

    auto best = kdx::gpr_select_rbf(data.X, data.y, {1e-3, 1.0},
                                    {1e-4, 1e-2}, 5, 3);
    // gamma = 1e-3 underfits badly; the search must reject it.
    CHECK(best.gamma == 1.0);
    CHECK(best.mse < 0.05);
}

TEST_CASE("grid search input validation") {
    Matrix x = Matrix::Zero(4, 1);
    Vector y(4);
    y << 1, -1, 1, -1;
    CHECK_THROWS_AS(kdx::svm_select_rbf(x, y, {}, {1.0}, 2, 0),
                    kdx::ConfigError);
    CHECK_THROWS_AS(kdx::svm_select_rbf(x, y, {1.0}, {1.0}, 5, 0),
                    kdx::ConfigError);
    CHECK_THROWS_AS(kdx::gpr_select_rbf(Matrix(0, 1), Vector(0), {1.0}, {1.0},
                                        2, 0),
                    kdx::EmptyInput);
}

#include "kdx/toydata.hpp"

#include <cmath>
#include <functional>

#include "kdx/errors.hpp"
#include "kdx/rng.hpp"

namespace kdx {

namespace {

constexpr double kPi = 3.14159265358979323846;

// One abscissa per grid cell, jittered inside the cell: x_i = lo + (i + u_i)
// * (hi - lo) / n. Sorted by construction and free of near-duplicates.
Vector stratified_grid(int n, double lo, double hi, Rng& rng) {
    Vector x(n);
    const double w = (hi - lo) / static_cast<double>(n);
    for (int i = 0; i < n; ++i)
        x[i] = lo + (static_cast<double>(i) + rng.uniform()) * w;
    return x;
}

ToyData regression_1d(const ToySpec& spec, double lo, double hi,
                      const std::function<double(double)>& f) {
    Rng rng(spec.seed);
    ToyData data;
    data.X = stratified_grid(spec.n, lo, hi, rng);
    data.y.resize(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        double y = f(data.X(i, 0));
        if (spec.noise > 0.0) y += spec.noise * rng.normal();
        data.y[i] = y;
    }
    data.meta = {{"lo", lo}, {"hi", hi}};
    return data;
}

ToyData two_moons(const ToySpec& spec) {
    Rng rng(spec.seed);
    ToyData data;
    data.classification = true;
    data.X.resize(spec.n, 2);
    data.y.resize(spec.n);
    const int n1 = (spec.n + 1) / 2;
    for (int i = 0; i < spec.n; ++i) {
        const double t = rng.uniform(0.0, kPi);
        if (i < n1) {
            data.X(i, 0) = std::cos(t);
            data.X(i, 1) = std::sin(t);
            data.y[i] = 1.0;
        } else {
            data.X(i, 0) = 1.0 - std::cos(t);
            data.X(i, 1) = 0.5 - std::sin(t);
            data.y[i] = -1.0;
        }
    }
    if (spec.noise > 0.0)
        for (int i = 0; i < spec.n; ++i)
            for (int c = 0; c < 2; ++c)
                data.X(i, c) += spec.noise * rng.normal();
    data.meta = {{"radius", 1.0}, {"offset", 0.5}};
    return data;
}

ToyData circles(const ToySpec& spec) {
    Rng rng(spec.seed);
    ToyData data;
    data.classification = true;
    data.X.resize(spec.n, 2);
    data.y.resize(spec.n);
    const int n_outer = (spec.n + 1) / 2;
    for (int i = 0; i < spec.n; ++i) {
        const double t = rng.uniform(0.0, 2.0 * kPi);
        const double r = i < n_outer ? 1.0 : 0.5;
        data.X(i, 0) = r * std::cos(t);
        data.X(i, 1) = r * std::sin(t);
        data.y[i] = i < n_outer ? -1.0 : 1.0;
    }
    if (spec.noise > 0.0)
        for (int i = 0; i < spec.n; ++i)
            for (int c = 0; c < 2; ++c)
                data.X(i, c) += spec.noise * rng.normal();
    data.meta = {{"radius_outer", 1.0}, {"radius_inner", 0.5}};
    return data;
}

ToyData ellipsoids(const ToySpec& spec) {
    Rng rng(spec.seed);
    ToyData data;
    data.classification = true;
    data.X.resize(spec.n, 2);
    data.y.resize(spec.n);
    const int n1 = (spec.n + 1) / 2;
    const double s1 = 1.0, s2 = 0.3;  // principal spreads before tilting
    for (int i = 0; i < spec.n; ++i) {
        const bool first = i < n1;
        const double theta = first ? kPi / 4.0 : -kPi / 4.0;
        const double cx = first ? -1.5 : 1.5;
        const double a = s1 * rng.normal();
        const double b = s2 * rng.normal();
        data.X(i, 0) = cx + a * std::cos(theta) - b * std::sin(theta);
        data.X(i, 1) = a * std::sin(theta) + b * std::cos(theta);
        data.y[i] = first ? 1.0 : -1.0;
    }
    if (spec.noise > 0.0)
        for (int i = 0; i < spec.n; ++i)
            for (int c = 0; c < 2; ++c)
                data.X(i, c) += spec.noise * rng.normal();
    data.meta = {{"center_sep", 3.0}, {"tilt", kPi / 4.0}};
    return data;
}

ToyData noisy_ring(const ToySpec& spec) {
    Rng rng(spec.seed);
    ToyData data;
    data.X.resize(spec.n, 2);
    data.y.resize(0);
    for (int i = 0; i < spec.n; ++i) {
        const double t = rng.uniform(0.0, 2.0 * kPi);
        double r = 1.0;
        if (spec.noise > 0.0) r += spec.noise * rng.normal();
        data.X(i, 0) = r * std::cos(t);
        data.X(i, 1) = r * std::sin(t);
    }
    data.meta = {{"radius", 1.0}};
    return data;
}

ToyData sinusoid_pair(const ToySpec& spec) {
    Rng rng(spec.seed);
    ToyData data;
    data.X.resize(spec.n, 2);
    data.y.resize(0);
    const Vector xs = stratified_grid(spec.n, 0.0, 2.0 * kPi, rng);
    for (int i = 0; i < spec.n; ++i) {
        data.X(i, 0) = xs[i];
        double s = std::sin(3.0 * xs[i]);
        if (spec.noise > 0.0) s += spec.noise * rng.normal();
        data.X(i, 1) = s;
    }
    data.meta = {{"frequency", 3.0}};
    return data;
}

ToyData piecewise_plane(const ToySpec& spec) {
    Rng rng(spec.seed);
    ToyData data;
    data.X.resize(spec.n, 2);
    data.y.resize(spec.n);
    for (int i = 0; i < spec.n; ++i) {
        data.X(i, 0) = rng.uniform(-20.0, 20.0);
        data.X(i, 1) = rng.uniform(-20.0, 20.0);
    }
    for (int i = 0; i < spec.n; ++i) {
        const double x1 = data.X(i, 0), x2 = data.X(i, 1);
        double y = x1 >= 0.0 ? 5.0 * x1 + x2 : x1 + x2;
        if (spec.noise > 0.0) y += spec.noise * rng.normal();
        data.y[i] = y;
    }
    data.meta = {{"slope_pos", 5.0}, {"slope_neg", 1.0}};
    return data;
}

}  // namespace

const std::vector<std::string>& toy_dataset_names() {
    static const std::vector<std::string> names = {
        "line",        "parabola",   "sine",          "x_sin_x",
        "line_plus_sine", "two_moons", "circles",      "ellipsoids",
        "noisy_ring",  "sinusoid_pair", "piecewise_plane"};
    return names;
}

ToyData generate_toy(const ToySpec& spec) {
    if (spec.n < 1) throw ConfigError("toydata: n must be >= 1");
    if (spec.noise < 0.0) throw ConfigError("toydata: noise must be >= 0");

    if (spec.name == "line")
        return regression_1d(spec, -3.0, 3.0, [](double x) { return x; });
    if (spec.name == "parabola")
        return regression_1d(spec, -3.0, 3.0, [](double x) { return x * x; });
    if (spec.name == "sine")
        return regression_1d(spec, -kPi, kPi,
                             [](double x) { return std::sin(x); });
    if (spec.name == "x_sin_x")
        return regression_1d(spec, -2.0 * kPi, 2.0 * kPi,
                             [](double x) { return x * std::sin(x); });
    if (spec.name == "line_plus_sine")
        return regression_1d(spec, -2.0 * kPi, 2.0 * kPi,
                             [](double x) { return x + std::sin(x); });
    if (spec.name == "two_moons") return two_moons(spec);
    if (spec.name == "circles") return circles(spec);
    if (spec.name == "ellipsoids") return ellipsoids(spec);
    if (spec.name == "noisy_ring") return noisy_ring(spec);
    if (spec.name == "sinusoid_pair") return sinusoid_pair(spec);
    if (spec.name == "piecewise_plane") return piecewise_plane(spec);
    throw UnknownDataset("toydata: unknown dataset '" + spec.name + "'");
}

}  // namespace kdx

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kdx/linalg.hpp"

namespace kdx {

// Seeded synthetic datasets. Regression sets return X (n x 1 or n x 2) and
// y; classification sets return labels in {-1, +1}; paired sets
// (noisy_ring, sinusoid_pair) return X as n x 2 with an empty y.
//
//   line            y = x + eps              x in [-3, 3]
//   parabola        y = x^2 + eps            x in [-3, 3]
//   sine            y = sin(x) + eps         x in [-pi, pi]
//   x_sin_x         y = x sin(x) + eps       x in [-2pi, 2pi]
//   line_plus_sine  y = x + sin(x) + eps     x in [-2pi, 2pi]
//   two_moons       interleaved half-circles, unit radius, offset 0.5
//   circles         concentric circles, radii 1 and 0.5
//   ellipsoids      two overlapping tilted Gaussian blobs
//   noisy_ring      ring of radius 1 with radial noise (paired columns)
//   sinusoid_pair   (x, sin(3x) + eps), x in [0, 2pi) (paired columns)
//   piecewise_plane y = 5x1 + x2 for x1 >= 0, y = x1 + x2 otherwise,
//                   x1, x2 in [-20, 20]
//
// 1D regression abscissas use a jittered stratified grid so clustered
// duplicates cannot arise; all draws derive from `seed` alone.
struct ToySpec {
    std::string name;
    int n = 100;
    double noise = 0.0;
    std::uint64_t seed = 0;
};

struct ToyData {
    Matrix X;
    Vector y;                   // empty for paired sets
    bool classification = false;
    std::map<std::string, double> meta;  // generator constants
};

// Throws UnknownDataset for an unrecognized name, ConfigError for n < 1 or
// noise < 0.
ToyData generate_toy(const ToySpec& spec);

const std::vector<std::string>& toy_dataset_names();

}  // namespace kdx

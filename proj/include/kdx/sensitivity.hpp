#pragma once

#include "kdx/linalg.hpp"

namespace kdx {

// Per-sample derivative field: values(i, j) = df(x_i)/dx^j.
struct DerivField {
    Matrix values;  // n x d
};

// Feature relevance s_j = (1/n) sum_i values(i,j)^2, length d.
// Throws EmptyInput when the field has no samples.
Vector feature_sensitivity(const DerivField& field);

// Sample relevance q_i = (1/d) sum_j values(i,j)^2, length n.
Vector point_sensitivity(const DerivField& field);

}  // namespace kdx

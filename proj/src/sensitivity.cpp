#include "kdx/sensitivity.hpp"

#include "kdx/errors.hpp"

namespace kdx {

namespace {

void check_field(const DerivField& field) {
    if (field.values.rows() == 0 || field.values.cols() == 0)
        throw EmptyInput("sensitivity: derivative field has no entries");
    if (!field.values.allFinite())
        throw NonFiniteInput("sensitivity: derivative field is non-finite");
}

}  // namespace

Vector feature_sensitivity(const DerivField& field) {
    check_field(field);
    return field.values.array().square().colwise().mean().transpose();
}

Vector point_sensitivity(const DerivField& field) {
    check_field(field);
    return field.values.array().square().rowwise().mean();
}

}  // namespace kdx

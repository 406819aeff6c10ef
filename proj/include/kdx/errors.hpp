#pragma once

#include <stdexcept>
#include <string>

namespace kdx {

// Base class for every library failure so callers can catch kdx errors
// wholesale (the CLI maps them onto exit codes).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand shapes do not line up (vector lengths, matrix sizes, ARD
// lengthscale count, kernels restricted to d=1, ...).
struct DimensionMismatch : Error {
    using Error::Error;
};

// An input contains NaN or infinity.
struct NonFiniteInput : Error {
    using Error::Error;
};

// A matrix handed to a symmetric routine is not symmetric to tolerance.
struct NotSymmetric : Error {
    using Error::Error;
};

// Cholesky failed even after the jitter escalation ladder.
struct NotPositiveDefinite : Error {
    using Error::Error;
};

// Derivative order outside the supported range.
struct InvalidOrder : Error {
    using Error::Error;
};

// Eigen-truncation rank outside [1, n].
struct InvalidRank : Error {
    using Error::Error;
};

// Classifier training data contains a single class.
struct SingleClassInput : Error {
    using Error::Error;
};

// Paired-sample routines got X and Y with different row counts.
struct SampleCountMismatch : Error {
    using Error::Error;
};

// Gradient stepping could not find an accepting step on the first iteration.
struct StepCollapse : Error {
    using Error::Error;
};

// Toy-dataset name not recognized.
struct UnknownDataset : Error {
    using Error::Error;
};

// A routine was called with no samples to work on.
struct EmptyInput : Error {
    using Error::Error;
};

// Bad configuration: invalid kernel spec, malformed JSON, out-of-range
// hyperparameter, unusable flag combinations.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed CSV; the message carries the 1-based line number.
struct CsvError : Error {
    using Error::Error;
};

}  // namespace kdx

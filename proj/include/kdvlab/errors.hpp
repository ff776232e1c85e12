#pragma once

#include <stdexcept>
#include <string>

namespace kdvlab {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A field that must be mean-zero (antiderivative, K, J, Miura) is not.
struct NonZeroMean : Error {
    explicit NonZeroMean(double mean)
        : Error("field is not mean-zero (mean = " + std::to_string(mean) + ")") {}
};

/// An exponent left the representable range of double.
struct Overflow : Error {
    using Error::Error;
};

/// A dense determinant lost all significant digits.
struct IllConditioned : Error {
    using Error::Error;
};

/// A lattice state is too short for the requested stencil.
struct TooShort : Error {
    using Error::Error;
};

/// The implicit-midpoint fixed point did not contract within the iteration cap.
struct NoConvergence : Error {
    explicit NoConvergence(int iters)
        : Error("fixed-point iteration did not converge in " + std::to_string(iters) + " iterations") {}
};

/// A time step violated the per-step invariant-drift guard.
struct StepTooLarge : Error {
    using Error::Error;
};

/// Requested mode count is outside [1, n/3].
struct BadModeCount : Error {
    using Error::Error;
};

/// Importance weights have collapsed (effective sample size below floor).
struct DegenerateWeights : Error {
    using Error::Error;
};

struct TooFewSamples : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

struct ConfigInvalid : Error {
    using Error::Error;
};

struct IoFailure : Error {
    using Error::Error;
};

} // namespace kdvlab

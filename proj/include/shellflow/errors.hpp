#pragma once

#include <stdexcept>
#include <string>

namespace shellflow {

// Base class for everything thrown by the library. The CLI maps subtypes
// to exit codes: validation -> 2, solver stops -> 3, I/O -> 4.
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- geometry ---
struct OutOfTube : SimError {
    using SimError::SimError;
};
struct AmplitudeExceeded : SimError {
    using SimError::SimError;
};
struct NonInvertible : SimError {
    using SimError::SimError;
};
struct NoConvergence : SimError {
    using SimError::SimError;
};

// --- basis ---
struct EigensolveFailure : SimError {
    using SimError::SimError;
};
struct InfSupDeficient : SimError {
    using SimError::SimError;
};
struct IncompatibleFlux : SimError {
    using SimError::SimError;
};

// --- dynamics ---
struct NotSPD : SimError {
    using SimError::SimError;
};
struct IncompatibleData : SimError {
    using SimError::SimError;
};
struct SelfIntersection : SimError {
    using SimError::SimError;
};
struct SingularProjection : SimError {
    using SimError::SimError;
};
struct SingularSolve : SimError {
    using SimError::SimError;
};
struct DegenerateWeight : SimError {
    using SimError::SimError;
};

// --- diagnostics ---
struct InsufficientHistory : SimError {
    using SimError::SimError;
};

// --- cli_io ---
struct ParseError : SimError {
    using SimError::SimError;
};
struct ValidationError : SimError {
    using SimError::SimError;
};
struct IOFailure : SimError {
    using SimError::SimError;
};

} // namespace shellflow

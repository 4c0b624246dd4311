#pragma once

#include <stdexcept>
#include <string>

namespace peermax {

// Error taxonomy used across the library. The CLI maps these onto its exit
// codes: validation-class errors -> 2, capacity -> 3, audit failures -> 4.

/// Argument outside its mathematical domain (e.g. quantile q not in [0,1]).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Structural invariant violated (probabilities not summing to 1, n < 2, ...).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Parameter outside the range an operation supports (e.g. hard-instance n too small).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Exact engine asked for a representation it does not handle (non-discrete buyer).
struct RepresentationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Joint-support product exceeds the configured cap.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace peermax

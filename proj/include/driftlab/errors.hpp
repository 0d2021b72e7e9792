#pragma once

#include <stdexcept>
#include <string>

namespace driftlab {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad parameter or precondition violation. The CLI maps it to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Two paths that were expected to live on the same TimeGrid do not.
class GridMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Covariance/correlation matrix has an eigenvalue below the clamp tolerance.
class NotPsdError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Long-path grid does not line up with the segmentation windows.
class AlignmentError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Basis dimension too large for the sampling grid.
class AliasingError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// File read/write failure or malformed input file. The CLI maps it to exit code 2.
class IoError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ValidationError(what);
}

}  // namespace detail
}  // namespace driftlab

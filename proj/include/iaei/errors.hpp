#pragma once

#include <stdexcept>
#include <string>

namespace iaei {

// Exit-code families used by the CLI: validation -> 2, parse -> 3,
// solver/io/runtime -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct DimensionMismatch : ValidationError {
    using ValidationError::ValidationError;
};
struct NoLabels : ValidationError {
    using ValidationError::ValidationError;
};
struct NonFinite : ValidationError {
    using ValidationError::ValidationError;
};
struct NonPositiveWeight : ValidationError {
    using ValidationError::ValidationError;
};
struct MissingImputation : ValidationError {
    using ValidationError::ValidationError;
};
struct MissingModel : ValidationError {
    using ValidationError::ValidationError;
};
struct OracleNeedsLabels : ValidationError {
    using ValidationError::ValidationError;
};
struct AllMissing : ValidationError {
    using ValidationError::ValidationError;
};
struct TooFewRows : ValidationError {
    using ValidationError::ValidationError;
};
struct TooManyCovariates : ValidationError {
    using ValidationError::ValidationError;
};
struct InsufficientMonths : ValidationError {
    using ValidationError::ValidationError;
};

struct ParseError : Error {
    using Error::Error;
};
struct SchemaError : ParseError {
    using ParseError::ParseError;
};

struct SolverError : Error {
    using Error::Error;
};
struct SingularSystem : SolverError {
    using SolverError::SolverError;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace iaei

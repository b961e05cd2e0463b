#pragma once

#include <stdexcept>
#include <string>

namespace ibias {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
    kSuccess = 0,
    kFailure = 1,
    kValidation = 2,
    kMissingInput = 3,
    kNumerical = 4,
};

/// Input that is syntactically or semantically invalid (bad schema,
/// broken invariant, conflicting configuration).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed binary or text file. Treated as a validation failure.
class FormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A required file, embedding, or run artifact is absent.
class MissingInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training or evaluation produced a non-finite quantity.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ibias

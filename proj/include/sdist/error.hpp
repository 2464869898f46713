#pragma once

#include <stdexcept>
#include <string>

namespace sdist {

enum class ErrorKind {
    EmptySet,
    TooFewSamples,
    TooFewPoints,
    TooFewCandidates,
    NotSymmetric,
    NotPSD,
    NoConvergence,
    DimensionMismatch,
    ShapeMismatch,
    PsiOutOfRange,
    MissingCenterOutputs,
    MissingInput,
    InvalidArgument,
    BadInput,
    NoFeasibleTheta,
    MalformedFile,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can dispatch on it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace sdist

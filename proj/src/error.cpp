#include "sdist/error.hpp"

namespace sdist {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptySet: return "EmptySet";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::TooFewPoints: return "TooFewPoints";
        case ErrorKind::TooFewCandidates: return "TooFewCandidates";
        case ErrorKind::NotSymmetric: return "NotSymmetric";
        case ErrorKind::NotPSD: return "NotPSD";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::PsiOutOfRange: return "PsiOutOfRange";
        case ErrorKind::MissingCenterOutputs: return "MissingCenterOutputs";
        case ErrorKind::MissingInput: return "MissingInput";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::BadInput: return "BadInput";
        case ErrorKind::NoFeasibleTheta: return "NoFeasibleTheta";
        case ErrorKind::MalformedFile: return "MalformedFile";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace sdist

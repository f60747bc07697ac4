#include "tmest/error.hpp"

namespace tmest {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::Io: return "Io";
    case ErrorCode::UnreachablePair: return "UnreachablePair";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::DegenerateCandidate: return "DegenerateCandidate";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::MalformedWeights: return "MalformedWeights";
    case ErrorCode::ZeroTruth: return "ZeroTruth";
    case ErrorCode::EmptyMask: return "EmptyMask";
  }
  return "Unknown";
}

}  // namespace tmest

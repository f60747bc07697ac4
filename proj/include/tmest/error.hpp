#ifndef TMEST_ERROR_HPP
#define TMEST_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tmest {

enum class ErrorCode {
  InvalidInput,
  Io,
  UnreachablePair,
  DimensionMismatch,
  ZeroRow,
  DegenerateCandidate,
  InsufficientData,
  DegenerateSample,
  QuadratureFailure,
  MalformedWeights,
  ZeroTruth,
  EmptyMask,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tmest

#endif  // TMEST_ERROR_HPP

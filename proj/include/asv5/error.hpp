#pragma once

#include <stdexcept>
#include <string>

namespace asv5 {

// Failure classes. Each maps onto one process exit code in the CLI.
enum class ErrorKind {
  kUsage,             // bad arguments or configuration
  kParse,             // unreadable or malformed input file
  kProtocolMismatch,  // scores and keys (or submissions) do not line up
  kDegenerate,        // data too degenerate for the requested metric
};

enum class ErrorCode {
  kIo,
  kMalformedScore,
  kMalformedKey,
  kDuplicateTrial,
  kMixedTriplets,
  kUnknownLabel,
  kLabelAttackMismatch,
  kCodecQualityMismatch,
  kQualityOutOfRange,
  kUnmatchedScore,
  kMissingScore,
  kTrackMismatch,
  kTrialSetMismatch,
  kUnmappedAttack,
  kEmptyClass,
  kEmptySlice,
  kEmptyGroup,
  kDegenerateTandem,
  kDegenerateCalibration,
  kTooFewSubmissions,
  kInvalidArgument,
};

ErrorKind KindOf(ErrorCode code);
const char *CodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(CodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorKind kind() const { return KindOf(code_); }

 private:
  ErrorCode code_;
};

}  // namespace asv5

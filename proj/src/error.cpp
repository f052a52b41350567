#include "asv5/error.hpp"

namespace asv5 {

ErrorKind KindOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return ErrorKind::kUsage;
    case ErrorCode::kIo:
    case ErrorCode::kMalformedScore:
    case ErrorCode::kMalformedKey:
    case ErrorCode::kDuplicateTrial:
    case ErrorCode::kMixedTriplets:
    case ErrorCode::kUnknownLabel:
    case ErrorCode::kLabelAttackMismatch:
    case ErrorCode::kCodecQualityMismatch:
    case ErrorCode::kQualityOutOfRange:
      return ErrorKind::kParse;
    case ErrorCode::kUnmatchedScore:
    case ErrorCode::kMissingScore:
    case ErrorCode::kTrackMismatch:
    case ErrorCode::kTrialSetMismatch:
    case ErrorCode::kUnmappedAttack:
      return ErrorKind::kProtocolMismatch;
    case ErrorCode::kEmptyClass:
    case ErrorCode::kEmptySlice:
    case ErrorCode::kEmptyGroup:
    case ErrorCode::kDegenerateTandem:
    case ErrorCode::kDegenerateCalibration:
    case ErrorCode::kTooFewSubmissions:
      return ErrorKind::kDegenerate;
  }
  return ErrorKind::kUsage;
}

const char *CodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kMalformedScore: return "MalformedScore";
    case ErrorCode::kMalformedKey: return "MalformedKey";
    case ErrorCode::kDuplicateTrial: return "DuplicateTrial";
    case ErrorCode::kMixedTriplets: return "MixedTriplets";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kLabelAttackMismatch: return "LabelAttackMismatch";
    case ErrorCode::kCodecQualityMismatch: return "CodecQualityMismatch";
    case ErrorCode::kQualityOutOfRange: return "QualityOutOfRange";
    case ErrorCode::kUnmatchedScore: return "UnmatchedScore";
    case ErrorCode::kMissingScore: return "MissingScore";
    case ErrorCode::kTrackMismatch: return "TrackMismatch";
    case ErrorCode::kTrialSetMismatch: return "TrialSetMismatch";
    case ErrorCode::kUnmappedAttack: return "UnmappedAttack";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kEmptySlice: return "EmptySlice";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kDegenerateTandem: return "DegenerateTandem";
    case ErrorCode::kDegenerateCalibration: return "DegenerateCalibration";
    case ErrorCode::kTooFewSubmissions: return "TooFewSubmissions";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace asv5

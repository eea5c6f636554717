#include "embedfit/error.hpp"

namespace embedfit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateSet: return "DegenerateSet";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::InsufficientLabels: return "InsufficientLabels";
    case ErrorCode::ZeroProjection: return "ZeroProjection";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::EmptyExemplars: return "EmptyExemplars";
    case ErrorCode::UnresolvedName: return "UnresolvedName";
    case ErrorCode::InsufficientCandidates: return "InsufficientCandidates";
    case ErrorCode::InvalidTemplate: return "InvalidTemplate";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SplitInfeasible: return "SplitInfeasible";
    case ErrorCode::DuplicateClass: return "DuplicateClass";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::GalleryTooSmall: return "GalleryTooSmall";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::NonUtf8Name: return "NonUtf8Name";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace embedfit

#include "ooro/error.hpp"

namespace ooro {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::SelfOcclusion: return "SelfOcclusion";
    case ErrorKind::InconsistentMatrix: return "InconsistentMatrix";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::MalformedAnnotation: return "MalformedAnnotation";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::UnmatchedImageId: return "UnmatchedImageId";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorKind::MissingMask: return "MissingMask";
    case ErrorKind::EmptyCategoryList: return "EmptyCategoryList";
    case ErrorKind::InvalidImage: return "InvalidImage";
    case ErrorKind::CacheMiss: return "CacheMiss";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::EmptyEvaluation: return "EmptyEvaluation";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

}  // namespace ooro

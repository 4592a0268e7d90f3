#include "svmetro/error.hpp"

namespace svmetro {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NotFinite: return "NotFinite";
    case ErrorCode::DegenerateLine: return "DegenerateLine";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::MappedToInfinity: return "MappedToInfinity";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::ZeroLength: return "ZeroLength";
    case ErrorCode::MissingFace: return "MissingFace";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::InvalidPose: return "InvalidPose";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::UndecodableImage: return "UndecodableImage";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::NotCalibrated: return "NotCalibrated";
    case ErrorCode::BadRequest: return "BadRequest";
  }
  return "Unknown";
}

}  // namespace svmetro

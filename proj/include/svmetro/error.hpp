#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace svmetro {

// Machine-readable failure categories shared by the library, CLI and service.
enum class ErrorCode {
  DegenerateInput,
  ZeroVector,
  NotFinite,
  DegenerateLine,
  InsufficientPoints,
  DegenerateConfiguration,
  MappedToInfinity,
  NoConsensus,
  ParseError,
  ValidationError,
  DegeneratePair,
  DegenerateGeometry,
  DegenerateDirection,
  ZeroLength,
  MissingFace,
  BehindCamera,
  InvalidPose,
  UnknownReference,
  UndecodableImage,
  UnknownSession,
  NotCalibrated,
  BadRequest,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace svmetro

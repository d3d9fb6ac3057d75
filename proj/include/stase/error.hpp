#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stase {

// Every failure the engine reports. The enumerator spelling is the
// user-facing error name (CLI prints it verbatim).
enum class ErrorCode {
  EmptyPrompt,
  NoStems,
  MissingStem,
  SampleRateMismatch,
  UnknownRir,
  EmptyHrirBank,
  AzimuthOutOfRange,
  DelayTooLong,
  NonpositiveDistance,
  Rt60OutOfRange,
  NotStereo,
  TooShort,
  BandAboveNyquist,
  ItdOutOfRange,
  InvalidBuffer,
  InvalidPlan,
  ParseError,
  SchemaError,
  ManifestError,
  UnsupportedFormat,
  Corrupt,
  IoError,
  UnknownTemplate,
  ConfigError,
};

constexpr std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyPrompt: return "EmptyPrompt";
    case ErrorCode::NoStems: return "NoStems";
    case ErrorCode::MissingStem: return "MissingStem";
    case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorCode::UnknownRir: return "UnknownRir";
    case ErrorCode::EmptyHrirBank: return "EmptyHrirBank";
    case ErrorCode::AzimuthOutOfRange: return "AzimuthOutOfRange";
    case ErrorCode::DelayTooLong: return "DelayTooLong";
    case ErrorCode::NonpositiveDistance: return "NonpositiveDistance";
    case ErrorCode::Rt60OutOfRange: return "Rt60OutOfRange";
    case ErrorCode::NotStereo: return "NotStereo";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::BandAboveNyquist: return "BandAboveNyquist";
    case ErrorCode::ItdOutOfRange: return "ItdOutOfRange";
    case ErrorCode::InvalidBuffer: return "InvalidBuffer";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ManifestError: return "ManifestError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::Corrupt: return "Corrupt";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace stase

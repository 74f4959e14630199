#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cqe {

enum class ErrorCode {
  NotHermitian,
  NoConvergence,
  DimMismatch,
  InvalidState,
  InvalidDistribution,
  InvalidProfile,
  InvalidPovm,
  NotBinary,
  DimTooLarge,
  OutOfRange,
  SeedLengthMismatch,
  ConfigParse,
  Validation,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::InvalidPovm: return "InvalidPovm";
    case ErrorCode::NotBinary: return "NotBinary";
    case ErrorCode::DimTooLarge: return "DimTooLarge";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SeedLengthMismatch: return "SeedLengthMismatch";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::Validation: return "Validation";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) throw Error(code, what);
}

}  // namespace detail
}  // namespace cqe

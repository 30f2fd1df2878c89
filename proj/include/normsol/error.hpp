#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace normsol {

enum class ErrorCode {
  InvalidArgument,
  NoRoots,
  ZeroField,
  SupportOverflow,
  DomainTooSmall,
  H1Violated,
  H2Violated,
  H3Violated,
  NotConverged,
  RegionEscape,
  LandscapeViolated,
  BlowUpGuard,
  ConfigError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoRoots: return "NoRoots";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::SupportOverflow: return "SupportOverflow";
    case ErrorCode::DomainTooSmall: return "DomainTooSmall";
    case ErrorCode::H1Violated: return "H1Violated";
    case ErrorCode::H2Violated: return "H2Violated";
    case ErrorCode::H3Violated: return "H3Violated";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::RegionEscape: return "RegionEscape";
    case ErrorCode::LandscapeViolated: return "LandscapeViolated";
    case ErrorCode::BlowUpGuard: return "BlowUpGuard";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace detail

}  // namespace normsol

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oscillat {

enum class ErrorKind {
  DegenerateBasis,
  OddResolution,
  RankDeficientSymbol,
  UnknownCatalogEntry,
  InvalidCoefficients,
  SolverBreakdown,
  ResolutionViolation,
  NotPositiveDefinite,
  LambdaSearchFailed,
  MarginTooSmall,
  NearSpectrumShift,
  EigSolverFailure,
  ForcingGridTooCoarse,
  CFLViolation,
  InsufficientPoints,
  ZeroError,
  InvalidConfig,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::OddResolution: return "OddResolution";
    case ErrorKind::RankDeficientSymbol: return "RankDeficientSymbol";
    case ErrorKind::UnknownCatalogEntry: return "UnknownCatalogEntry";
    case ErrorKind::InvalidCoefficients: return "InvalidCoefficients";
    case ErrorKind::SolverBreakdown: return "SolverBreakdown";
    case ErrorKind::ResolutionViolation: return "ResolutionViolation";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::LambdaSearchFailed: return "LambdaSearchFailed";
    case ErrorKind::MarginTooSmall: return "MarginTooSmall";
    case ErrorKind::NearSpectrumShift: return "NearSpectrumShift";
    case ErrorKind::EigSolverFailure: return "EigSolverFailure";
    case ErrorKind::ForcingGridTooCoarse: return "ForcingGridTooCoarse";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::ZeroError: return "ZeroError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable kind next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace oscillat

#pragma once

#include <stdexcept>
#include <string>

namespace fkspde {

enum class ErrorKind {
  InvalidParameter,
  DiracPointwiseEval,
  SingularityHit,
  DensityUnavailable,
  UnboundedKernel,
  GridMismatch,
  NotPSD,
  NotTranslationInvariant,
  InsufficientDecades,
  NoiseDominated,
  TailBoundUnavailable,
  ProposalUnnormalizable,
  OrderTooHigh,
  DalangViolation,
  UnsupportedCombination,
  ConfigError,
  EllipticityViolation,
  DivergentTail,
  QuadratureFailure,
  TableBuildFailure,
  NumericalFailure,
};

const char* error_name(ErrorKind kind);

// Precondition violations map to exit code 2, numerical failures to 1.
bool is_precondition(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::DiracPointwiseEval: return "DiracPointwiseEval";
    case ErrorKind::SingularityHit: return "SingularityHit";
    case ErrorKind::DensityUnavailable: return "DensityUnavailable";
    case ErrorKind::UnboundedKernel: return "UnboundedKernel";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::NotTranslationInvariant: return "NotTranslationInvariant";
    case ErrorKind::InsufficientDecades: return "InsufficientDecades";
    case ErrorKind::NoiseDominated: return "NoiseDominated";
    case ErrorKind::TailBoundUnavailable: return "TailBoundUnavailable";
    case ErrorKind::ProposalUnnormalizable: return "ProposalUnnormalizable";
    case ErrorKind::OrderTooHigh: return "OrderTooHigh";
    case ErrorKind::DalangViolation: return "DalangViolation";
    case ErrorKind::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::EllipticityViolation: return "EllipticityViolation";
    case ErrorKind::DivergentTail: return "DivergentTail";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::TableBuildFailure: return "TableBuildFailure";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

inline bool is_precondition(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPSD:
    case ErrorKind::NoiseDominated:
    case ErrorKind::QuadratureFailure:
    case ErrorKind::TableBuildFailure:
    case ErrorKind::NumericalFailure:
      return false;
    default:
      return true;
  }
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace fkspde

#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dirac {

enum class ErrorKind {
  NonPhysical,          // quantum numbers do not label a bound state
  CriticalCoupling,     // g >= j + 1/2, w not real
  DomainError,          // argument outside a function's domain
  QuantizationMismatch, // power series failed to terminate
  DivergentIntegral,    // matrix element violates the convergence gate
  NoConvergence,        // quadrature hit its refinement cap
  SingularDenominator,  // recurrence coefficient denominator ~ 0
  DiagonalCase,         // kappa1 == kappa2 where the relation needs them distinct
  VariantUnresolved,    // neither form of the diagonal relation matched the oracle
  AbortOnDrift,         // ladder drifted away from the oracle
  Precondition,         // generic violated precondition
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
  case ErrorKind::NonPhysical: return "NonPhysical";
  case ErrorKind::CriticalCoupling: return "CriticalCoupling";
  case ErrorKind::DomainError: return "DomainError";
  case ErrorKind::QuantizationMismatch: return "QuantizationMismatch";
  case ErrorKind::DivergentIntegral: return "DivergentIntegral";
  case ErrorKind::NoConvergence: return "NoConvergence";
  case ErrorKind::SingularDenominator: return "SingularDenominator";
  case ErrorKind::DiagonalCase: return "DiagonalCase";
  case ErrorKind::VariantUnresolved: return "VariantUnresolved";
  case ErrorKind::AbortOnDrift: return "AbortOnDrift";
  case ErrorKind::Precondition: return "Precondition";
  }
  return "Unknown";
}

/// Short %g rendering for messages.
inline std::string show(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

/// Every failure in the library is reported as a dirac::Error carrying its kind.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace dirac

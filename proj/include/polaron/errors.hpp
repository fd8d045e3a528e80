#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polaron {

enum class ErrorCode {
  InvalidModel,
  NonConvergent,
  DivergentIntegrand,
  NoConvergence,
  GridTooCoarse,
  EnergyIncrease,
  NoRoot,
  VelocityTooLarge,
  WindowViolation,
  DegenerateDenominator,
  TooFewSamples,
  BasisOverflow,
  QuadratureBudgetExceeded,
  OscillatoryFailure,
  XiNotResolved,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every numerical failure in the library is reported through this type.
/// `code()` is stable and is what the CLI maps onto exit statuses.
class PolaronError : public std::runtime_error {
 public:
  PolaronError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace polaron

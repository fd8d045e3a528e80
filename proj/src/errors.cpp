#include "polaron/errors.hpp"

namespace polaron {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::DivergentIntegrand: return "DivergentIntegrand";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::EnergyIncrease: return "EnergyIncrease";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::VelocityTooLarge: return "VelocityTooLarge";
    case ErrorCode::WindowViolation: return "WindowViolation";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::BasisOverflow: return "BasisOverflow";
    case ErrorCode::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorCode::OscillatoryFailure: return "OscillatoryFailure";
    case ErrorCode::XiNotResolved: return "XiNotResolved";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace polaron

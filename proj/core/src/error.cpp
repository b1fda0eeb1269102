#include "sobolev/error.hpp"

namespace sobolev {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositivePotential: return "NonPositivePotential";
    case ErrorCode::EmptyMaximizerSet: return "EmptyMaximizerSet";
    case ErrorCode::SmoothingFailed: return "SmoothingFailed";
    case ErrorCode::ModulusNotFound: return "ModulusNotFound";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::OffPoleCenter: return "OffPoleCenter";
    case ErrorCode::TailNotConverged: return "TailNotConverged";
    case ErrorCode::UnknownScalarB0: return "UnknownScalarB0";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::MissingConstant: return "MissingConstant";
    case ErrorCode::MissingGradient: return "MissingGradient";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::ExtrapolationUnstable: return "ExtrapolationUnstable";
    case ErrorCode::SupNotAtPole: return "SupNotAtPole";
    case ErrorCode::ScenarioFailed: return "ScenarioFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace sobolev

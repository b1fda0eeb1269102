#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sobolev {

enum class ErrorCode {
  NonPositivePotential,
  EmptyMaximizerSet,
  SmoothingFailed,
  ModulusNotFound,
  GridMismatch,
  GridTooCoarse,
  OffPoleCenter,
  TailNotConverged,
  UnknownScalarB0,
  BetaOutOfRange,
  MissingConstant,
  MissingGradient,
  ZeroField,
  NonPositiveDensity,
  ExtrapolationUnstable,
  SupNotAtPole,
  ScenarioFailed,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sobolev

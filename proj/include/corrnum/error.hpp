#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace corrnum {

enum class Errc {
  InvalidArgument,
  IdentityWord,
  CutoffTooLarge,
  Overflow,
  NotLoxodromic,
  DegenerateAxes,
  PilotValidationFailed,
  EmptySpectrum,
  NonPositiveMix,
  InsufficientData,
  WindowDegenerate,
  ProportionalSpectra,
  EndpointFitUnstable,
  SlopeNotBracketed,
  FlatObjective,
  EmptyWindows,
  ConfigError,
  ParseError,
  IoError,
  CheckFailed,  // an oracle or identity check did not hold
};

std::string_view to_string(Errc code);

// Exit code used by the command line front-end for an error of this kind:
// 2 configuration / input, 3 validation, 4 numerical.
int exit_code(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace corrnum

#include "corrnum/error.hpp"

namespace corrnum {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IdentityWord: return "IdentityWord";
    case Errc::CutoffTooLarge: return "CutoffTooLarge";
    case Errc::Overflow: return "Overflow";
    case Errc::NotLoxodromic: return "NotLoxodromic";
    case Errc::DegenerateAxes: return "DegenerateAxes";
    case Errc::PilotValidationFailed: return "PilotValidationFailed";
    case Errc::EmptySpectrum: return "EmptySpectrum";
    case Errc::NonPositiveMix: return "NonPositiveMix";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::WindowDegenerate: return "WindowDegenerate";
    case Errc::ProportionalSpectra: return "ProportionalSpectra";
    case Errc::EndpointFitUnstable: return "EndpointFitUnstable";
    case Errc::SlopeNotBracketed: return "SlopeNotBracketed";
    case Errc::FlatObjective: return "FlatObjective";
    case Errc::EmptyWindows: return "EmptyWindows";
    case Errc::ConfigError: return "ConfigError";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
    case Errc::CheckFailed: return "CheckFailed";
  }
  return "Unknown";
}

int exit_code(Errc code) {
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::ConfigError:
    case Errc::ParseError:
    case Errc::IoError:
    case Errc::DegenerateAxes:
    case Errc::CutoffTooLarge:
      return 2;
    case Errc::PilotValidationFailed:
    case Errc::NotLoxodromic:
    case Errc::CheckFailed:
      return 3;
    default:
      return 4;
  }
}

}  // namespace corrnum

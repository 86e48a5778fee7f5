#include "dspn/error.hpp"

namespace dspn {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::InvalidGrid: return "InvalidGrid";
    case Errc::InvalidPosition: return "InvalidPosition";
    case Errc::InvalidAffinity: return "InvalidAffinity";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidMask: return "InvalidMask";
    case Errc::InvalidFeature: return "InvalidFeature";
    case Errc::InvalidConfidence: return "InvalidConfidence";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::EmptyGroundTruth: return "EmptyGroundTruth";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::InvalidState: return "InvalidState";
    case Errc::Diverged: return "Diverged";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::EmptySparse: return "EmptySparse";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace dspn

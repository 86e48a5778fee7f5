#pragma once

#include <stdexcept>
#include <string>

namespace dspn {

enum class Errc {
  InvalidGrid,
  InvalidPosition,
  InvalidAffinity,
  ShapeMismatch,
  InvalidMask,
  InvalidFeature,
  InvalidConfidence,
  InvalidConfig,
  EmptyGroundTruth,
  NonFiniteLoss,
  InvalidState,
  Diverged,
  InvalidSpec,
  EmptySparse,
  CorruptFile,
  UnsupportedFormat,
};

const char* to_string(Errc code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dspn

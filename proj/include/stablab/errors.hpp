#pragma once

#include <stdexcept>
#include <string>

namespace stablab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define STABLAB_DEFINE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(#Name ": " + what) {}         \
  }

STABLAB_DEFINE_ERROR(NonSPDMetric);
STABLAB_DEFINE_ERROR(EdgeProximity);
STABLAB_DEFINE_ERROR(BelowGradientFloor);
STABLAB_DEFINE_ERROR(SupportViolation);
STABLAB_DEFINE_ERROR(NonConvergence);
STABLAB_DEFINE_ERROR(LinearSolveFailure);
STABLAB_DEFINE_ERROR(EigenNonConvergence);
STABLAB_DEFINE_ERROR(EmptyLevelSet);
STABLAB_DEFINE_ERROR(TooFewVertices);
STABLAB_DEFINE_ERROR(RadiusTooSmall);
STABLAB_DEFINE_ERROR(SignConditionViolated);
STABLAB_DEFINE_ERROR(NotASolution);
STABLAB_DEFINE_ERROR(ConfigError);
STABLAB_DEFINE_ERROR(FormatError);

#undef STABLAB_DEFINE_ERROR

}  // namespace stablab

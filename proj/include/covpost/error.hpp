#pragma once

#include <stdexcept>
#include <string>

namespace covpost {

// Base of every error raised by the library. Subclasses name the failure
// category; the CLI maps user-input categories to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define COVPOST_DECLARE_ERROR(Name)        \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

COVPOST_DECLARE_ERROR(NotPositiveDefinite);
COVPOST_DECLARE_ERROR(DimensionMismatch);
COVPOST_DECLARE_ERROR(DegreesOfFreedomTooSmall);
COVPOST_DECLARE_ERROR(ParameterOutOfRange);
COVPOST_DECLARE_ERROR(NonFiniteDensity);
COVPOST_DECLARE_ERROR(SingularDesign);
COVPOST_DECLARE_ERROR(UnknownPreset);
COVPOST_DECLARE_ERROR(EmptyChain);
COVPOST_DECLARE_ERROR(PlanError);
COVPOST_DECLARE_ERROR(PreconditionError);
COVPOST_DECLARE_ERROR(ParseError);
COVPOST_DECLARE_ERROR(IoError);

#undef COVPOST_DECLARE_ERROR

}  // namespace covpost

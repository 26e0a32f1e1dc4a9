#pragma once

#include <stdexcept>
#include <string>

namespace mbkde {

//! Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

#define MBKDE_DEFINE_ERROR(Name)                                              \
  class Name : public Error                                                   \
  {                                                                           \
  public:                                                                     \
    using Error::Error;                                                       \
  }

MBKDE_DEFINE_ERROR(DomainError);
MBKDE_DEFINE_ERROR(EmptySampleError);
MBKDE_DEFINE_ERROR(UnknownDensityError);
MBKDE_DEFINE_ERROR(UnsupportedMomentError);
MBKDE_DEFINE_ERROR(InsufficientSupportError);
MBKDE_DEFINE_ERROR(InvalidPilotError);
MBKDE_DEFINE_ERROR(DegenerateFitError);
MBKDE_DEFINE_ERROR(RenormalisationError);
MBKDE_DEFINE_ERROR(GridError);
MBKDE_DEFINE_ERROR(EdgeError);
MBKDE_DEFINE_ERROR(SearchFailureError);

#undef MBKDE_DEFINE_ERROR

} // namespace mbkde

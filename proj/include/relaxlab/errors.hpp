#ifndef RELAXLAB_ERRORS_HPP
#define RELAXLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace relaxlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RELAXLAB_DEFINE_ERROR(Name)              \
  class Name : public Error {                    \
   public:                                       \
    using Error::Error;                          \
  };

RELAXLAB_DEFINE_ERROR(DimensionMismatch)
RELAXLAB_DEFINE_ERROR(SingularInput)
RELAXLAB_DEFINE_ERROR(NotSymmetric)
RELAXLAB_DEFINE_ERROR(NotRotation)
RELAXLAB_DEFINE_ERROR(ProfileUnbounded)
RELAXLAB_DEFINE_ERROR(InvalidArgument)
RELAXLAB_DEFINE_ERROR(PreconditionFailed)
RELAXLAB_DEFINE_ERROR(ZeroSlope)
RELAXLAB_DEFINE_ERROR(ForbiddenSlope)
RELAXLAB_DEFINE_ERROR(NotDiagonal)
RELAXLAB_DEFINE_ERROR(PartitionGap)
RELAXLAB_DEFINE_ERROR(WitnessGapTooLarge)
RELAXLAB_DEFINE_ERROR(HierarchyViolated)
RELAXLAB_DEFINE_ERROR(ResourceGuard)
RELAXLAB_DEFINE_ERROR(ParseError)

#undef RELAXLAB_DEFINE_ERROR

}  // namespace relaxlab

#endif  // RELAXLAB_ERRORS_HPP

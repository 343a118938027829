#pragma once

#include <stdexcept>
#include <string>

namespace nia {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NIA_DEFINE_ERROR(Name)            \
  class Name : public Error {             \
   public:                                \
    explicit Name(const std::string& msg) \
        : Error(#Name ": " + msg) {}      \
  }

NIA_DEFINE_ERROR(CycleDetected);
NIA_DEFINE_ERROR(IndexOutOfRange);
NIA_DEFINE_ERROR(NotAPath);
NIA_DEFINE_ERROR(InvalidDimension);
NIA_DEFINE_ERROR(LengthMismatch);
NIA_DEFINE_ERROR(DimensionMismatch);
NIA_DEFINE_ERROR(NonFinite);
NIA_DEFINE_ERROR(DomainError);
NIA_DEFINE_ERROR(QuadratureFailure);
NIA_DEFINE_ERROR(MissingParent);
NIA_DEFINE_ERROR(InvalidConfig);
NIA_DEFINE_ERROR(IoError);

#undef NIA_DEFINE_ERROR

}  // namespace nia

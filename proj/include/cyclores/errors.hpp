#pragma once

#include <stdexcept>
#include <string>

namespace cyclores {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CYCLORES_DEFINE_ERROR(Name)   \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

CYCLORES_DEFINE_ERROR(ParameterError);
CYCLORES_DEFINE_ERROR(DomainError);
CYCLORES_DEFINE_ERROR(InsufficientSamples);
CYCLORES_DEFINE_ERROR(NoConvergence);
CYCLORES_DEFINE_ERROR(NonConvergent);
CYCLORES_DEFINE_ERROR(NotAccelerating);
CYCLORES_DEFINE_ERROR(SignError);
CYCLORES_DEFINE_ERROR(DegenerateDenominator);
CYCLORES_DEFINE_ERROR(ExistenceBound);
CYCLORES_DEFINE_ERROR(ValidationError);

#undef CYCLORES_DEFINE_ERROR

/// Step size fell to the floor repeatedly; carries where it happened.
class StepFloorReached : public Error {
 public:
  StepFloorReached(const std::string& what, double t) : Error(what), time(t) {}
  double time;
};

/// Config syntax error with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line_no, int column_no)
      : Error("line " + std::to_string(line_no) + ", column " + std::to_string(column_no) + ": " +
              what),
        line(line_no),
        column(column_no) {}
  int line;
  int column;
};

}  // namespace cyclores

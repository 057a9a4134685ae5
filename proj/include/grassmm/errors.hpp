#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace grassmm {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

// An iterative kernel failed to converge or produced non-finite values.
class NumericError : public Error {
public:
  using Error::Error;
};

class RankDeficientError : public Error {
public:
  RankDeficientError(std::size_t column, const std::string &what)
      : Error(what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t column_;
};

// Some principal angle reached pi/2, so the connecting geodesic is not unique.
class GeodesicNotUnique : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// The cost went up during a block update: the surrogate is not a majorant.
class MonotonicityViolation : public Error {
public:
  using Error::Error;
};

// A surrogate minimizer returned a value outside its constraint set.
class InfeasibleBlock : public Error {
public:
  using Error::Error;
};

} // namespace grassmm

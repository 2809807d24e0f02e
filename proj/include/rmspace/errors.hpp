#ifndef RMSPACE_ERRORS_HPP
#define RMSPACE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rmspace {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input: bad event indices, length mismatches, invalid partitions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A sigma-stable hull would exceed its configured size cap.
class HullCapExceeded : public Error {
 public:
  using Error::Error;
};

/// Extended-real arithmetic hit an undefined form such as (+inf) + (-inf).
class ExtendedArithmeticError : public Error {
 public:
  using Error::Error;
};

/// A contraction bound claimed by the caller failed on observed iterates.
class ContractionViolation : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of its iteration budget.
class MaxIterationsExceeded : public Error {
 public:
  using Error::Error;
};

/// A stated hypothesis (properness, Caristi inequality, start-point bound,
/// sigma-stability of a map) failed a runtime check.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace rmspace

#endif  // RMSPACE_ERRORS_HPP

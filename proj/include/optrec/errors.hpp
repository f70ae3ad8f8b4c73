#pragma once

#include <stdexcept>
#include <string>

namespace optrec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violated an operation's precondition (dimensions, ranges, point
/// placement). The message names the violated condition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// 1 - conj(zeta) z vanished to working precision.
class DegenerateKernelError : public Error {
 public:
  using Error::Error;
};

/// The kernel Gramian of a point configuration is numerically singular.
class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, double rcond)
      : Error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// A convex solve did not reach the requested certificate.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// K intersected with the data-consistent set is empty.
class EmptyFeasibleSetError : public Error {
 public:
  using Error::Error;
};

/// Data y is not in the range of the observation map.
class InconsistentDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace optrec

#pragma once

#include <stdexcept>
#include <string>

namespace torbill {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A curve or domain invariant (unit speed, convexity, positivity) is violated.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// The generator does not have the required sign pattern of its derivatives.
class NonConformingCurve : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A ray touches the boundary tangentially and the exit time is ill-posed.
class GrazingAmbiguous : public Error {
 public:
  GrazingAmbiguous(const std::string& what, double s) : Error(what), s_(s) {}
  /// Ray parameter of the touching point.
  double at() const { return s_; }

 private:
  double s_;
};

/// Inflection directions are requested where they are undefined.
class UndefinedInflection : public Error {
 public:
  using Error::Error;
};

/// A query falls outside the time range covered by a trajectory.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Perturbed trajectories disagree on their bounce count.
class NonSmoothPoint : public Error {
 public:
  using Error::Error;
};

/// The specular basis cannot be formed.
class DegenerateBasis : public Error {
 public:
  using Error::Error;
};

/// A trajectory stopped before reaching the requested event.
class StoppedTrajectory : public Error {
 public:
  using Error::Error;
};

}  // namespace torbill

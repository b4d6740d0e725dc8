#pragma once

#include <stdexcept>
#include <string>

namespace ffg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands disagree in dimension or truncation order.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A precondition on the input values does not hold.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The linear part is singular (|det U| <= zero_tol).
class NotInvertible : public Error {
 public:
  using Error::Error;
};

/// Eigenvector matrix too ill-conditioned to treat the matrix as diagonalizable.
class DefectiveLinearPart : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue lies on the closed negative real axis, outside the principal log domain.
class BranchCut : public Error {
 public:
  using Error::Error;
};

}  // namespace ffg

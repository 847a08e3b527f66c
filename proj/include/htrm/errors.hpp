#pragma once

#include <stdexcept>
#include <string>

namespace htrm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Ginibre draw whose condition estimate exceeded the rejection threshold.
class NearSingular : public Error {
 public:
  using Error::Error;
};

class NonHermitianInput : public Error {
 public:
  using Error::Error;
};

/// No vertical line separates the left and right pole families of a Meijer G integrand.
class ContourSeparationError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine (quadrature truncation, root finding) did not converge.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class CacheMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace htrm

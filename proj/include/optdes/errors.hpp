#pragma once

#include <stdexcept>
#include <string>

namespace optdes {

//! Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Malformed or inconsistent input: dimension mismatch, bad ranges, parse errors.
class InputError : public Error {
 public:
  using Error::Error;
};

//! A matrix that must be positive definite is (numerically) singular.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}

  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

//! A numerical procedure could not produce a result (e.g. no bracketing sign change).
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double f_left, double f_right)
      : Error(what), f_left_(f_left), f_right_(f_right) {}
  explicit NumericalError(const std::string& what) : NumericalError(what, 0.0, 0.0) {}

  double f_left() const noexcept { return f_left_; }
  double f_right() const noexcept { return f_right_; }

 private:
  double f_left_;
  double f_right_;
};

}  // namespace optdes

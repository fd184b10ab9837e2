#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qpt {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

// Errors caused by bad inputs (dimensions, malformed states, bad configuration).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonHermitian : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Errors raised by the numerics on otherwise well-formed input.
class NumericError : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public NumericError {
 public:
  RankDeficient(const std::string& what, int rank) : NumericError(what), rank_(rank) {}
  int rank() const { return rank_; }

 private:
  int rank_;
};

class IllConditioned : public NumericError {
 public:
  IllConditioned(const std::string& what, double condition)
      : NumericError(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class SingularProcess : public NumericError {
 public:
  using NumericError::NumericError;
};

class BranchAmbiguity : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonFinite : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace qpt

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bogo {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Root of the library's exception hierarchy. The CLI maps each subclass to
// an exit code (see experiments.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input or model failed a structural / numerical precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The Hessian block matrix is not positive: the Bogoliubov step is refused.
class HessianGapError : public ValidationError {
 public:
  HessianGapError(const std::string& what, double eta)
      : ValidationError(what), eta_(eta) {}
  double eta() const { return eta_; }

 private:
  double eta_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residuals)
      : Error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

// A basis or dense matrix would exceed a configured size cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, std::string field)
      : Error(what), line_(line), field_(std::move(field)) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace bogo

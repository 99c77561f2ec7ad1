#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace phever {

using cplx = std::complex<double>;
// Storage type of jet coefficients.
using xcplx = std::complex<long double>;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Division by zero or a pole of an elementary function.
class SingularEvaluation : public Error {
 public:
  using Error::Error;
};

// Argument of ln/sqrt/pow lies within the guard band of the negative real axis.
class BranchAmbiguity : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& found);
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(std::size_t offset, const std::string& name);
  const std::string& name() const { return name_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

class QuadratureFailure : public Error {
 public:
  QuadratureFailure(cplx a, cplx b, double error);
  cplx worst_a, worst_b;
  double worst_error;
};

class DegenerateMetric : public Error {
 public:
  explicit DegenerateMetric(cplx det);
  cplx det;
};

class CalibrationRequired : public Error {
 public:
  using Error::Error;
};

class CalibrationAmbiguous : public Error {
 public:
  CalibrationAmbiguous(const std::string& what, std::vector<std::string> survivors)
      : Error(what), survivors(std::move(survivors)) {}
  std::vector<std::string> survivors;
};

class FamilyConstraint : public Error {
 public:
  FamilyConstraint(const std::string& constraint, const std::string& detail)
      : Error("family constraint '" + constraint + "' violated: " + detail), constraint(constraint) {}
  std::string constraint;
};

class GaugeRestriction : public Error {
 public:
  using Error::Error;
};

class AmbiguousClassification : public Error {
 public:
  AmbiguousClassification(const std::string& a, const std::string& b)
      : Error("ambiguous classification: candidates " + a + " and " + b), first(a), second(b) {}
  std::string first, second;
};

class NotAnAlgebra : public Error {
 public:
  explicit NotAnAlgebra(double residual)
      : Error("generators do not close under commutation (worst fit residual " +
              std::to_string(residual) + ")"),
        residual(residual) {}
  double residual;
};

class SamplingFailure : public Error {
 public:
  explicit SamplingFailure(const std::string& constraint)
      : Error("sampling failure: could not find enough admissible points (most frequent violation: " +
              constraint + ")"),
        constraint(constraint) {}
  std::string constraint;
};

class ConfigError : public Error {
 public:
  ConfigError(int line, int column, const std::string& msg)
      : Error("config error at line " + std::to_string(line) + ", column " + std::to_string(column) +
              ": " + msg),
        line(line),
        column(column) {}
  int line, column;
};

}  // namespace phever

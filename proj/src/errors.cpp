#include "phever/errors.hpp"

#include <sstream>

namespace phever {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += v[i];
  }
  return s;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
    : Error("syntax error at byte " + std::to_string(offset) + ": found " + found + ", expected one of {" +
            join(expected) + "}"),
      offset_(offset),
      expected_(std::move(expected)) {}

UnknownIdentifier::UnknownIdentifier(std::size_t offset, const std::string& name)
    : Error("unknown identifier '" + name + "' at byte " + std::to_string(offset)), name_(name), offset_(offset) {}

namespace {
std::string quad_msg(cplx a, cplx b, double e) {
  std::ostringstream os;
  os << "quadrature failed to converge; worst subinterval [" << a << ", " << b << "] with error estimate " << e;
  return os.str();
}
std::string det_msg(cplx d) {
  std::ostringstream os;
  os << "degenerate metric: det g = " << d;
  return os.str();
}
}  // namespace

QuadratureFailure::QuadratureFailure(cplx a, cplx b, double error)
    : Error(quad_msg(a, b, error)), worst_a(a), worst_b(b), worst_error(error) {}

DegenerateMetric::DegenerateMetric(cplx d) : Error(det_msg(d)), det(d) {}

}  // namespace phever

#pragma once

#include <array>
#include <memory>
#include <vector>

#include "phever/errors.hpp"

namespace phever {

using MultiIndex = std::array<int, 4>;

// Coordinate chart of a sample point. Slot 3 holds y, z or w.
enum class Chart { QPXY, QPXZ, QPXW };

const char* chart_name(Chart c);

struct JetPoint {
  std::array<cplx, 4> coords{};
  Chart chart = Chart::QPXY;
};

struct JetLayout;

// Truncated Taylor expansion of a complex function of up to four variables.
// Coefficient of multi-index a is (d^a f)/a! at the expansion point.
class Jet {
 public:
  Jet();
  Jet(int nvars, int order);

  static Jet constant(cplx v, int nvars, int order);
  static Jet variable(cplx v, int var, int nvars, int order);

  int nvars() const;
  int order() const;
  std::size_t size() const { return c_.size(); }

  cplx value() const { return cplx(c_[0]); }
  cplx coeff(const MultiIndex& a) const { return cplx(xcoeff(a)); }
  void set_coeff(const MultiIndex& a, xcplx v);
  // Mixed partial derivative d^a f at the expansion point.
  cplx partial(const MultiIndex& a) const { return cplx(xpartial(a)); }

  // Unrounded storage values.
  xcplx xvalue() const { return c_[0]; }
  xcplx xcoeff(const MultiIndex& a) const;
  xcplx xpartial(const MultiIndex& a) const;

  const std::vector<xcplx>& coeffs() const { return c_; }
  std::vector<xcplx>& coeffs() { return c_; }
  const MultiIndex& index(std::size_t k) const;
  // Rank of a multi-index, or -1 if its degree exceeds the order.
  int rank(const MultiIndex& a) const;

  // Partial derivative as a jet of one lower order.
  Jet d(int var) const;
  Jet truncated(int order) const;
  // Same jet with value removed.
  Jet nilpotent() const;
  // Re-express in more variables; variable i maps to slot map[i].
  Jet embed(int nvars, const std::array<int, 4>& map) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& b);
  Jet& operator-=(const Jet& b);
  Jet& operator*=(const Jet& b);
  Jet& operator/=(const Jet& b);
  Jet& operator+=(cplx s);
  Jet& operator-=(cplx s);
  Jet& operator*=(cplx s);
  Jet& operator/=(cplx s);

  friend Jet operator*(const Jet& a, const Jet& b);

 private:
  std::shared_ptr<const JetLayout> layout_;
  std::vector<xcplx> c_;
  friend Jet compose(const Jet& outer, const std::vector<Jet>& inner);
  friend std::vector<Jet> invert(const std::vector<Jet>& map, const std::vector<cplx>& at);
};

// Binary operations truncate to the smaller order; nvars must agree.
Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, cplx s);
Jet operator+(cplx s, Jet a);
Jet operator-(Jet a, cplx s);
Jet operator-(cplx s, const Jet& a);
Jet operator*(Jet a, cplx s);
Jet operator*(cplx s, Jet a);
Jet operator/(Jet a, cplx s);
Jet operator/(cplx s, const Jet& a);

Jet reciprocal(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, cplx alpha);
Jet pow(const Jet& a, int n);
Jet sin(const Jet& a);
Jet cos(const Jet& a);

// Taylor polynomial `outer` (expanded at the values of `inner`) composed with `inner`.
Jet compose(const Jet& outer, const std::vector<Jet>& inner);

// Inverse of the map u -> map(u), where map holds n jets in n variables expanded at the point `at`.
// The result holds n jets in n variables expanded at the image point.
std::vector<Jet> invert(const std::vector<Jet>& map, const std::vector<cplx>& at);

// Identity function of coordinate `var` at the point, in all four variables.
Jet lift(const JetPoint& pt, int var, int order);

// Principal-branch guard shared by the scalar and jet evaluators.
constexpr double kBranchGuard = 1e-9;
void check_branch(cplx base, const char* fn);

// While alive, reciprocals and branch-cut functions on this thread also reject arguments within
// `margin` of zero, and branch-cut arguments within relative angle `margin` of the cut.
class AdmissionGuard {
 public:
  explicit AdmissionGuard(double margin);
  ~AdmissionGuard();
  AdmissionGuard(const AdmissionGuard&) = delete;
  AdmissionGuard& operator=(const AdmissionGuard&) = delete;

 private:
  double prev_;
};
double admission_margin();

}  // namespace phever

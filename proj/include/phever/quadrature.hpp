#pragma once

#include <functional>

#include "phever/jet.hpp"

namespace phever {

struct QuadOptions {
  double tol = 1e-12;  // absolute, or relative to |integral| when that is larger than 1
  int max_depth = 40;
  int max_intervals = 20000;
};

struct QuadResult {
  Jet value;
  double error = 0;
  int intervals = 0;
};

// Adaptive Gauss-Kronrod 7-15 along the segment a -> b, coefficientwise on jet-valued integrands.
QuadResult integrate_segment(const std::function<Jet(cplx)>& f, cplx a, cplx b, const QuadOptions& opt = {});

// Integrand f(q, w) of a profile Z(q, w) = int_{w0}^{w} f(q, s) ds. Both arguments are jets in the same variables.
using ProfileIntegrand = std::function<Jet(const Jet& q, const Jet& w)>;

struct IntegralProfile {
  ProfileIntegrand integrand;
  cplx w0 = 1.0;
  QuadOptions opt;
};

// Jet in (q, w) of the profile. Pure q-coefficients come from quadrature of the integrand's q-jet;
// coefficients with a w-derivative come from the integrand's own jet at the endpoint.
Jet integrate(const IntegralProfile& p, cplx q, cplx w, int order, double* error = nullptr);

}  // namespace phever

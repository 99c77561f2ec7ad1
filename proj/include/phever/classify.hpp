#pragma once

#include <array>
#include <string>
#include <vector>

#include "phever/families.hpp"

namespace phever {

struct PetrovType {
  std::string type;             // I, II, D, III, N or O
  std::vector<int> partition;   // root multiplicities, descending
  std::vector<cplx> roots;      // cluster centres in the rotated chart
  std::vector<double> radii;    // cluster radii
};

// Type from the quartic c1 t^4 + 4 c2 t^3 + 6 c3 t^2 + 4 c4 t + c5 (homogeneous, roots at infinity allowed).
PetrovType petrov_from_coefficients(const std::array<cplx, 5>& c, double tol = 1e-6);

// Type from the z-derivatives of the (E, D_z) jets; `tol` is the nonvanishing threshold.
PetrovType table1_type(const EDJets& ed, cplx lambda, double tol = 1e-8);

// r_a, r_b, M1, M2 for z = -y/x; A, Q, B are jets in (q,p,x,y) of order >= 1.
std::array<Residual, 4> nullstring_residuals(const std::array<Jet, 3>& abq, const JetPoint& qpxy);

struct CongruenceReport {
  cplx theta1 = 0, rho1 = 0, theta3 = 0, rho3 = 0;
  cplx theta2 = 0, theta4 = 0;  // type-D families only
  std::vector<std::string> labels;
  std::string symbol() const;  // "[++,--]"
};

CongruenceReport congruence_optics(const FamilyModel& m, const JetPoint& pt, double tol = 1e-8);

// Worst component of (1/2) L_K g - chi0 g, with the largest contributing term as scale.
Residual killing_residual(const FamilyModel& m, const SymmetryVector& k, const JetPoint& pt);

// Reduced symmetry equations (a) differentiated in z, (b), (c), (d), (e).
std::array<Residual, 5> master_residual(const EDJets& ed, const SymmetryVector& k, cplx lambda, cplx mu0);

// Relative least-squares misfit of a symmetry with a~ = 1 (eps~ = alpha~ = chi0 = 0), from the z-derivatives of
// the reduced symmetry equations at one point. Zero when such a symmetry exists. Needs jets of order 4.
double second_symmetry_obstruction(const EDJets& ed);

struct AlgebraReport {
  std::string name;
  // c[i][j][k]: [K_i, K_j] = sum_k c[i][j][k] K_k
  std::vector<std::vector<std::vector<cplx>>> structure;
  double fit_residual = 0;
};

// Commutator [X, Y]^a = X^b d_b Y^a - Y^b d_b X^a of vector fields given as order-1 jets.
std::array<cplx, 4> bracket(const std::array<Jet, 4>& X, const std::array<Jet, 4>& Y);

AlgebraReport algebra_identify(const FamilyModel& m, const std::vector<SymmetryVector>& gens,
                               const std::vector<JetPoint>& pts, double fit_tol = 1e-8);
// Name of the algebra with the given structure constants.
std::string algebra_name(const std::vector<std::vector<std::vector<cplx>>>& c, double tol = 1e-8);

}  // namespace phever

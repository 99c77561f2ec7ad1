#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phever/expr.hpp"
#include "phever/geometry.hpp"
#include "phever/quadrature.hpp"

namespace phever {

// A residual together with the magnitude of the largest term that entered it.
struct Residual {
  cplx value = 0;
  double scale = 0;
  double rel() const { return std::abs(value) / std::max(1.0, scale); }
};

// ---- key-function level ----

using KeyFunction = std::function<Jet(const Jet& q, const Jet& x, const Jet& y)>;

struct KeyFunctionSpec {
  KeyFunction W;
  cplx mu0 = 1.0;
  cplx lambda = 0.0;
  // W as an expression in q, x, y.
  static KeyFunctionSpec from_text(const std::string& w, cplx lambda, cplx mu0 = 1.0);
};

// A, Q, B as jets in (q,p,x,y) with `order` derivatives.
std::array<Jet, 3> abqs_from_W(const KeyFunctionSpec& s, const JetPoint& pt, int order = 2);
MetricField key_function_metric(const KeyFunctionSpec& s);
Residual hh_residual(const KeyFunctionSpec& s, const JetPoint& pt);
// Middle triplet with 2 Lambda moved to the left; A, Q, B are jets in (q,p,x,y) of order >= 2.
std::array<Residual, 4> middle_triplet_residuals(const Jet& A, const Jet& Q, const Jet& B, cplx x, cplx lambda);

struct Gauge {
  Expr qprime;  // q'(q), f = dq'/dq
  Expr h, sigma, L;
  cplx lambda0 = 1.0;
};

struct GaugeResult {
  KeyFunctionSpec spec;  // W' in primed coordinates
  // Primed coordinates as jets in the unprimed variables at an unprimed point.
  std::function<std::array<Jet, 4>(const JetPoint&, int order)> coordinates;
};

GaugeResult gauge_transform(const KeyFunctionSpec& s, const Gauge& g);
cplx transform_z(const Gauge& g, cplx q, cplx z);

// ---- (E, D) level ----

// E and D_z as jets in (q, z) expanded at (q, z).
struct EDJets {
  Jet E, Dz;
  cplx q = 0, z = 0;
};

struct EDFamilySpec {
  Expr E, Dz;  // in q, z
  Expr g;      // in q
  cplx lambda = 0, mu0 = 1.0;
  static EDFamilySpec from_text(const std::string& e, const std::string& dz, cplx lambda, const std::string& g = "0");
};

EDJets ed_jets(const EDFamilySpec& s, cplx q, cplx z, int order);
// Key function W = mu0 x^2 y^2/4 - Lambda y^2/(12 x) - x^2 E/2 - x^3 D + g with D given (not D_z).
KeyFunctionSpec ed_key_function(const Expr& E, const Expr& D, const Expr& g, cplx lambda, cplx mu0 = 1.0);
// Metric in (q,p,x,z) from E and D_z.
MetricField ed_metric(const EDFamilySpec& s);
// A, Q, B as jets in (q,p,x,y) at a (q,p,x,y) point, from (E, D_z) expanded at (q, -y/x).
std::array<Jet, 3> ed_abq(const EDJets& ed, const JetPoint& qpxy, cplx lambda, cplx mu0, int order);
std::array<Residual, 2> reduced_residuals(const EDJets& ed, cplx lambda);
// ASD coefficients predicted from E and D_z at (x, y).
std::array<cplx, 5> cdot_from_ed(const EDJets& ed, cplx x, cplx y, cplx lambda);

// ---- symmetry vectors ----

// K = a d_q + c d_p + (c_q x - a_q y - eps) d_y + (2/3) chi0 (2p d_p - x d_x + y d_y) with the
// functions a, c, eps, alpha of q given as jet maps.
struct SymmetryVector {
  std::string name;
  cplx chi0 = 0;
  std::function<Jet(const Jet& q)> a, c, eps, alpha;
};

SymmetryVector symmetry_from_text(const std::string& name, const std::string& a, const std::string& c,
                                  const std::string& eps = "0", const std::string& alpha = "0", cplx chi0 = 0);

// ---- catalog ----

struct ParamInfo {
  std::string name;
  std::string var;  // empty for constants
  std::string fallback;
  std::string doc;
};

struct FamilyInfo {
  std::string id;
  std::string claim;  // claimed type symbol
  Chart chart;
  std::vector<ParamInfo> params;
  std::string expected_asd;     // empty when not fixed by the family
  std::string expected_optics;  // empty when not fixed
  bool pseudo = false;          // nonexistence row
  std::string signature() const;
};

const std::vector<FamilyInfo>& catalog();
const FamilyInfo& nonexistence_family();
std::string normalize_family_id(const std::string& raw);
const FamilyInfo& family_info(const std::string& id);

struct FamilySpec {
  std::string id;
  std::map<std::string, cplx> constants;
  std::map<std::string, Expr> functions;
  std::map<std::string, std::string> text;  // every parameter as given or defaulted
  cplx mu0 = 1.0;
  cplx constant(const std::string& name) const;
  const Expr& function(const std::string& name) const;
};

FamilySpec make_family(const std::string& id, const std::vector<std::pair<std::string, std::string>>& sets = {});

struct OpenCondition {
  std::string name;
  double magnitude = 0;
  bool required = false;  // sample points violating it are rejected
};

struct FamilyModel {
  FamilySpec spec;
  const FamilyInfo* info = nullptr;
  Chart chart = Chart::QPXY;
  cplx lambda = 0, mu0 = 1.0;
  MetricField metric;
  // y as a function of the chart coordinates, as a jet in the four chart variables.
  std::function<Jet(const JetPoint&, int order)> y_of;
  // (E, D_z) at a chart point; empty for generic-W.
  std::function<EDJets(const JetPoint&, int order)> ed;
  // Throws FamilyConstraint when the point is not admissible.
  std::function<void(const JetPoint&)> admit;
  // Open (nonvanishing) conditions of the claim at the point.
  std::function<std::vector<OpenCondition>(const JetPoint&)> conditions;
  // Family-specific identities (Abel, Liouville) at the point.
  std::function<std::vector<std::pair<std::string, Residual>>(const JetPoint&)> identities;
  std::vector<SymmetryVector> generators;
  std::string expected_algebra;
  std::optional<KeyFunctionSpec> key;
  bool type_d_optics = false;
  cplx w0 = 1.0;
};

FamilyModel build_family(const FamilySpec& s);
MetricField build_metric(const FamilySpec& s);

// Vector field components in the chart of `pt` as jets in the four chart variables.
std::array<Jet, 4> vector_field(const FamilyModel& m, const SymmetryVector& k, const JetPoint& pt, int order);

// Conversions between a chart point and (q,p,x,y).
JetPoint to_qpxy(const FamilyModel& m, const JetPoint& pt);

// Liouville identity H + d_w(H_q/H) for H = -2 F_w Q_q/(F+Q)^2.
Residual liouville_residual(const Expr& F, const Expr& Q, cplx q, cplx w);

}  // namespace phever

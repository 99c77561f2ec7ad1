#pragma once

#include <functional>
#include <string>

#include "phever/jet.hpp"

namespace phever {

using Mat4 = std::array<std::array<cplx, 4>, 4>;
using JetMat4 = std::array<std::array<Jet, 4>, 4>;

// Rows are the 1-forms e^1..e^4; columns are coordinate slots of the chart.
// The metric is ds^2 = 2 (e^1 e^2 + e^3 e^4), i.e. g_ab = e1_a e2_b + e2_a e1_b + e3_a e4_b + e4_a e3_b.
struct MetricField {
  Chart chart = Chart::QPXY;
  std::function<JetMat4(const JetPoint&, int order)> tetrad;
};

// Jets of the four coordinates at the point, in four variables.
std::array<Jet, 4> coordinate_jets(const JetPoint& pt, int order);

JetMat4 metric_jets(const MetricField& m, const JetPoint& pt, int order);
Mat4 values(const JetMat4& m);

// Metric in the hyperheavenly chart (q,p,x,y) from A, Q, B given as functions of coordinate jets.
using AQBFunction = std::function<std::array<Jet, 3>(const std::array<Jet, 4>& coords)>;
MetricField hh_metric(AQBFunction aqb);
// Tetrad of the hyperheavenly chart from jets of A, Q, B and x.
JetMat4 hh_tetrad(const Jet& x, const Jet& A, const Jet& Q, const Jet& B);

struct Curvature {
  Mat4 g{}, ginv{};
  cplx det = 0;
  std::array<Mat4, 4> gamma{};              // gamma[a][b][c] = Gamma^a_bc
  std::array<std::array<Mat4, 4>, 4> riem{};  // riem[a][b][c][d] = R_abcd (all lower)
  Mat4 ricci{};                             // R_bd = R^a_bad
  cplx scalar = 0;                          // g^bd R_bd
};

// Needs metric jets of order >= 2.
Curvature curvature(const JetMat4& g);
Curvature curvature(const MetricField& m, const JetPoint& pt);

// Weyl tensor, all lower indices.
std::array<std::array<Mat4, 4>, 4> weyl_tensor(const Curvature& c);

// Tensor components in the frame E_a dual to the tetrad.
std::array<std::array<Mat4, 4>, 4> to_frame(const std::array<std::array<Mat4, 4>, 4>& t, const Mat4& E);
Mat4 inverse(const Mat4& m);

struct ConventionSet {
  bool calibrated = false;
  int ricci_sign = 1;     // reported Ricci = ricci_sign * R^a_bad
  char sd_family = 'A';   // 'A': planes {E1,E3},{E2,E4}; 'B': planes {E1,E4},{E2,E3}
  int lead = 0;           // leading null leg, 0 -> E1, 1 -> E2
  int weight = 1;         // coefficient k carries weight^k
  double scale = 1;

  std::string describe() const;
  std::string fingerprint() const;
  std::string serialize() const;
  static ConventionSet parse(const std::string& text);
  bool operator==(const ConventionSet& o) const;
};

std::vector<ConventionSet> convention_candidates();

struct WeylData {
  cplx R = 0;
  double cab_max = 0;         // max |frame component| of the traceless Ricci tensor
  double riemann_scale = 0;   // max |frame component| of the Riemann tensor
  std::array<cplx, 5> C{};    // self-dual C^(1..5)
  std::array<cplx, 5> Cdot{}; // anti-self-dual
};

WeylData weyl_coefficients(const Curvature& c, const Mat4& tetrad, const ConventionSet& conv);
WeylData weyl_coefficients(const MetricField& m, const ConventionSet& conv, const JetPoint& pt);

// Reference metric of the type-D family with b0 = 0 and its anchors.
MetricField calibration_reference(cplx lambda, cplx mu);
std::vector<JetPoint> calibration_points();

struct CalibrationOutcome {
  ConventionSet chosen;
  std::vector<std::string> survivors;
  int candidates = 0;
};

// Keeps the candidates reproducing R = -4 Lambda, C = (0,0,-2 mu x^3,0,0) and the anchored ASD values.
CalibrationOutcome calibrate(const std::vector<ConventionSet>& candidates = convention_candidates());

std::string default_calibration_path();
ConventionSet load_calibration(const std::string& path);
void save_calibration(const ConventionSet& c, const std::string& path);

}  // namespace phever

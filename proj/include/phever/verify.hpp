#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phever/classify.hpp"

namespace phever {

struct Tolerances {
  double einstein = 1e-8;
  double structural = 1e-10;
  double classify = 1e-6;
  double nonvanish = 1e-8;
  double residual = 1e-9;       // reduced equations, SD coefficients, Killing, null strings, identities
  double nonexistence = 1e-12;  // ASD coefficients of the nonexistence row
  double obstruction = 1e-3;    // lower bound for the second-symmetry obstruction
};

struct SuiteConfig {
  FamilySpec family;
  int points = 20;
  std::uint64_t seed = 42;
  Tolerances tol;
  double box_lo = 0.2, box_hi = 1.5;
  bool real_slice = false;  // real points, metric must be real of signature (+,+,-,-)
  int jet_order = 4;        // order of the (E, D_z) jets, at least 4
  int threads = 0;          // 0: hardware concurrency
  std::map<std::string, std::string> invocation;  // flags as given, copied into the report
};

// Reads a JSON suite file; errors carry line and column.
SuiteConfig load_config(const std::string& path);
SuiteConfig parse_config(const std::string& text);

struct PointRecord {
  int draw = 0;
  JetPoint point, qpxy;
  std::string error;
  double r_err = 0, cab_rel = 0, sd_err = 0;
  std::string sd_type, asd_type, table1;
  std::array<cplx, 5> cdot{};
  double cdot_max = 0, cdot_formula = 0, reduced = 0, middle = 0, hh = 0, nullstring = 0;
  std::string optics;
  std::vector<OpenCondition> conditions;
  std::vector<std::pair<std::string, double>> identities;
  std::vector<double> killing, master;  // per generator
  double obstruction = -1;              // -1 when not evaluated
  double imag_rel = 0;
  std::string signature;
};

struct ClaimResult {
  std::string name, verdict, detail;
  double worst = 0, tolerance = 0;
  bool lower_bound = false;  // worst is a minimum that must exceed the tolerance
};

struct VerificationReport {
  std::string family, claim, chart;
  std::map<std::string, std::string> parameters;
  std::map<std::string, std::string> invocation;
  std::uint64_t seed = 0;
  int points = 0, draws = 0;
  std::map<std::string, int> rejected;
  Tolerances tol;
  bool real_slice = false;
  std::string fingerprint, conventions;
  std::vector<PointRecord> records;
  std::vector<std::string> generators;
  std::string algebra, expected_algebra;
  std::vector<ClaimResult> claims;
  std::string verdict;
  double wall_clock_s = 0;
};

struct Sample {
  std::vector<std::pair<int, JetPoint>> accepted;  // (draw index, point)
  int draws = 0;
  std::map<std::string, int> rejected;  // constraint -> count
};

// Admissible points of the sample box; SamplingFailure after 100 N draws.
Sample sample_points(const FamilyModel& m, const SuiteConfig& cfg);

VerificationReport run_suite(const SuiteConfig& cfg, const ConventionSet& conv);

// The eight claimed rows with default parameters plus the nonexistence row.
std::vector<FamilySpec> table2_specs();
std::vector<VerificationReport> run_all(std::uint64_t seed, const ConventionSet& conv, int points = 20,
                                        const Tolerances& tol = {});

std::string report_json(const VerificationReport& r, bool include_timing = false);
std::string reports_json(const std::vector<VerificationReport>& rs, bool include_timing = false);
std::string report_csv(const VerificationReport& r);
std::string summary_line(const VerificationReport& r);

// Real-slice check of the metric at a point: relative imaginary part and eigenvalue signature.
std::pair<double, std::string> real_slice_check(const FamilyModel& m, const JetPoint& pt);

}  // namespace phever

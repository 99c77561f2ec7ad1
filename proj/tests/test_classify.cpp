#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "phever/classify.hpp"

using namespace phever;
using boost::multiprecision::cpp_rational;

namespace {

// ---- exact oracle over Q(i) ----

struct GQ {
  cpp_rational re = 0, im = 0;
  bool zero() const { return re == 0 && im == 0; }
};
GQ operator+(const GQ& a, const GQ& b) { return {a.re + b.re, a.im + b.im}; }
GQ operator-(const GQ& a, const GQ& b) { return {a.re - b.re, a.im - b.im}; }
GQ operator*(const GQ& a, const GQ& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
GQ operator/(const GQ& a, const GQ& b) {
  cpp_rational n = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
}

using Poly = std::vector<GQ>;  // ascending powers, no trailing zeros

void trim(Poly& p) {
  while (!p.empty() && p.back().zero()) p.pop_back();
}

Poly deriv(const Poly& p) {
  Poly r;
  for (std::size_t k = 1; k < p.size(); ++k) r.push_back(p[k] * GQ{cpp_rational(static_cast<int>(k)), 0});
  trim(r);
  return r;
}

std::pair<Poly, Poly> divmod(Poly a, const Poly& b) {
  Poly q(a.size() >= b.size() ? a.size() - b.size() + 1 : 0);
  while (a.size() >= b.size() && !a.empty()) {
    std::size_t s = a.size() - b.size();
    GQ f = a.back() / b.back();
    q[s] = f;
    for (std::size_t k = 0; k < b.size(); ++k) a[s + k] = a[s + k] - f * b[k];
    a.pop_back();
    trim(a);
  }
  trim(q);
  return {q, a};
}

Poly gcd(Poly a, Poly b) {
  while (!b.empty()) {
    Poly r = divmod(a, b).second;
    a = b;
    b = r;
  }
  return a;
}

int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

// Partition of root multiplicities by Yun's square-free decomposition; roots at infinity fill up degree 4.
std::string oracle_type(Poly p) {
  trim(p);
  if (p.empty()) return "O";
  std::vector<int> part;
  int inf = 4 - degree(p);
  if (inf > 0) part.push_back(inf);
  if (degree(p) > 0) {
    Poly d = deriv(p);
    Poly a = gcd(p, d);
    Poly b = divmod(p, a).first;
    Poly c = divmod(d, a).first;
    for (int i = 1; degree(b) > 0; ++i) {
      Poly bd = deriv(b);
      Poly cmb = c;
      cmb.resize(std::max(c.size(), bd.size()));
      for (std::size_t k = 0; k < bd.size(); ++k) cmb[k] = cmb[k] - bd[k];
      trim(cmb);
      Poly ai = gcd(b, cmb);
      for (int k = 0; k < degree(ai); ++k) part.push_back(i);
      b = divmod(b, ai).first;
      c = divmod(cmb, ai).first;
    }
  }
  std::sort(part.rbegin(), part.rend());
  if (part == std::vector<int>{1, 1, 1, 1}) return "I";
  if (part == std::vector<int>{2, 1, 1}) return "II";
  if (part == std::vector<int>{2, 2}) return "D";
  if (part == std::vector<int>{3, 1}) return "III";
  if (part == std::vector<int>{4}) return "N";
  return "?";
}

cplx to_c(const GQ& a) { return {a.re.convert_to<double>(), a.im.convert_to<double>()}; }

// Quartic coefficients c1..c5 for a4 t^4 + a3 t^3 + a2 t^2 + a1 t + a0.
std::array<cplx, 5> to_c5(const Poly& p) {
  auto at = [&](std::size_t k) { return k < p.size() ? to_c(p[k]) : cplx(0); };
  return {at(4), at(3) / 4.0, at(2) / 6.0, at(1) / 4.0, at(0)};
}

// ---- family helpers ----

std::vector<JetPoint> admissible_points(const FamilyModel& m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  std::vector<JetPoint> out;
  while (static_cast<int>(out.size()) < n) {
    JetPoint pt;
    pt.chart = m.chart;
    for (auto& c : pt.coords) c = {u(rng), u(rng)};
    try {
      m.admit(pt);
    } catch (const FamilyConstraint&) {
      continue;
    }
    out.push_back(pt);
  }
  return out;
}

FamilyModel fam(const std::string& id, const std::vector<std::pair<std::string, std::string>>& sets = {}) {
  return build_family(make_family(id, sets));
}

}  // namespace

TEST_CASE("petrov_from_coefficients examples") {
  CHECK(petrov_from_coefficients({0, 0, 0, 0, 0}).type == "O");
  CHECK(petrov_from_coefficients({1, 0, 0, 0, 0}).type == "N");
  auto d = petrov_from_coefficients({1, -0.5, 1.0 / 6.0, 0, 0});
  CHECK(d.type == "D");
  CHECK(d.partition == std::vector<int>{2, 2});
  auto t3 = petrov_from_coefficients({1, -0.25, 0, 0, 0});
  CHECK(t3.type == "III");
  CHECK(t3.partition == std::vector<int>{3, 1});
}

TEST_CASE("petrov_from_coefficients agrees with the exact oracle on 1000 quartics") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> small(-3, 3), parts(0, 5), coin(0, 3);
  const std::vector<std::vector<int>> partitions{{1, 1, 1, 1}, {2, 1, 1}, {2, 2}, {3, 1}, {4}, {}};
  int disagreements = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto& part = partitions[parts(rng)];
    Poly p;
    if (part.empty()) {
      // Unconstrained coefficients.
      for (int k = 0; k < 5; ++k) p.push_back({small(rng), small(rng)});
    } else {
      p = {{1, 0}};
      std::vector<GQ> roots;
      for (std::size_t i = 0; i < part.size(); ++i) {
        GQ r;
        do r = {small(rng), small(rng)};
        while (std::any_of(roots.begin(), roots.end(), [&](const GQ& s) { return s.re == r.re && s.im == r.im; }));
        roots.push_back(r);
        bool infinite = i == 0 && coin(rng) == 0;  // the first root may sit at infinity
        for (int k = 0; k < part[i] && !infinite; ++k) {
          Poly q(p.size() + 1);
          for (std::size_t j = 0; j < p.size(); ++j) {
            q[j + 1] = q[j + 1] + p[j];
            q[j] = q[j] - p[j] * r;
          }
          p = q;
        }
      }
      GQ scale{small(rng) + 4, small(rng)};
      for (auto& c : p) c = c * scale;
    }
    trim(p);
    std::string expect = oracle_type(p);
    auto c = to_c5(p);
    std::string got = petrov_from_coefficients(c).type;
    std::array<cplx, 5> rev{c[4], c[3], c[2], c[1], c[0]};
    std::array<cplx, 5> scaled;
    for (int k = 0; k < 5; ++k) scaled[k] = cplx(0.3, -1.7) * c[k];
    if (got != expect || petrov_from_coefficients(rev).type != expect ||
        petrov_from_coefficients(scaled).type != expect)
      ++disagreements;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("ill-conditioned clustering is reported as ambiguous") {
  // t^2 (t - e)^2 = t^4 - 2e t^3 + e^2 t^2
  auto c = [](double e) { return std::array<cplx, 5>{1, -2 * e / 4, e * e / 6, 0, 0}; };
  CHECK(petrov_from_coefficients(c(1e-4)).type == "N");
  CHECK(petrov_from_coefficients(c(0.05)).type == "D");
  CHECK_THROWS_AS(petrov_from_coefficients(c(0.003)), AmbiguousClassification);
}

TEST_CASE("table1_type examples") {
  auto m = fam("typeD-ppmm");
  for (const auto& pt : admissible_points(m, 3, 1)) CHECK(table1_type(m.ed(pt, 4), m.lambda).type == "D");
  auto n = fam("typeN-pppp");
  for (const auto& pt : admissible_points(n, 3, 2)) CHECK(table1_type(n.ed(pt, 4), n.lambda).type == "N");
  auto s = EDFamilySpec::from_text("z^2", "0", 0.0);
  CHECK(table1_type(ed_jets(s, 0.4, 0.7, 4), 0.0).type == "O");
}

TEST_CASE("null-string residuals") {
  JetPoint pt{{0.3, 0.7, 1.2, 0.5}, Chart::QPXY};
  auto flat = abqs_from_W(KeyFunctionSpec::from_text("0", 0.0), pt, 2);
  auto r = nullstring_residuals(flat, pt);
  CHECK(std::abs(r[0].value) < 1e-15);  // r_a
  CHECK(std::abs(r[2].value) < 1e-15);  // M1
  auto m = fam("typeD-pppp");
  for (const auto& p : admissible_points(m, 10, 3)) {
    auto rr = nullstring_residuals(ed_abq(m.ed(p, 4), p, m.lambda, m.mu0, 2), p);
    for (const auto& v : rr) CHECK(v.rel() <= 1e-9);
  }
}

TEST_CASE("congruence optics") {
  for (const auto& f : catalog()) {
    if (f.expected_optics.empty()) continue;
    auto m = fam(f.id);
    auto pt = admissible_points(m, 1, 4)[0];
    auto rep = congruence_optics(m, pt);
    CHECK(rep.labels.at(0) == "++");
    CHECK(rep.symbol() == f.expected_optics);
  }
  auto d = fam("typeD-ppmm");
  CHECK(congruence_optics(d, admissible_points(d, 1, 5)[0]).symbol() == "[++,--,--,++]");
  auto n = fam("typeN-pppp");
  CHECK(congruence_optics(n, admissible_points(n, 1, 6)[0]).labels.at(1) == "++");
}

TEST_CASE("Killing residuals") {
  SymmetryVector k1 = symmetry_from_text("K1", "0", "1");
  for (const auto& f : catalog()) {
    auto m = fam(f.id);
    for (const auto& pt : admissible_points(m, 2, 7)) CHECK(killing_residual(m, k1, pt).rel() <= 1e-10);
  }
  auto d = fam("typeD-ppmm");
  REQUIRE(d.generators.size() == 4);
  for (const auto& pt : admissible_points(d, 3, 8))
    for (const auto& k : d.generators) CHECK(killing_residual(d, k, pt).rel() <= 1e-9);
  auto h = fam("typeIII-pppp-sym");
  bool homothety = false;
  for (const auto& k : h.generators) {
    homothety = homothety || k.chi0 != cplx(0);
    for (const auto& pt : admissible_points(h, 3, 9)) CHECK(killing_residual(h, k, pt).rel() <= 1e-9);
  }
  CHECK(homothety);
  // A non-symmetry is detected.
  auto bad = symmetry_from_text("q d_q", "q", "0");
  CHECK(killing_residual(fam("typeN-pppp"), bad, admissible_points(fam("typeN-pppp"), 1, 10)[0]).rel() > 1e-6);
}

TEST_CASE("master residual examples") {
  SymmetryVector k1 = symmetry_from_text("K1", "0", "0");
  auto n2 = fam("typeN-2d");
  SymmetryVector dq = symmetry_from_text("d_q", "1", "0");
  for (const auto& pt : admissible_points(n2, 3, 11)) {
    auto ed = n2.ed(pt, 4);
    for (const auto& r : master_residual(ed, k1, n2.lambda, n2.mu0)) CHECK(std::abs(r.value) == 0.0);
    for (const auto& r : master_residual(ed, dq, n2.lambda, n2.mu0)) CHECK(r.rel() <= 1e-10);
  }
  auto d = fam("typeD-pppp");
  for (const auto& pt : admissible_points(d, 3, 12))
    for (const auto& r : master_residual(d.ed(pt, 4), dq, d.lambda, d.mu0)) CHECK(r.rel() <= 1e-10);
}

TEST_CASE("second symmetry obstruction") {
  auto d = fam("typeD-pppp");
  for (const auto& pt : admissible_points(d, 3, 13)) CHECK(second_symmetry_obstruction(d.ed(pt, 4)) <= 1e-9);
  auto two = fam("typeII-pppp");
  for (const auto& pt : admissible_points(two, 3, 14)) CHECK(second_symmetry_obstruction(two.ed(pt, 4)) >= 1e-3);
}

TEST_CASE("symmetry algebras") {
  auto check = [](const std::string& id, const std::vector<std::pair<std::string, std::string>>& sets,
                  const std::string& name) {
    auto m = fam(id, sets);
    auto rep = algebra_identify(m, m.generators, admissible_points(m, 3, 15));
    CHECK_MESSAGE(rep.name == name, id);
    CHECK(rep.fit_residual <= 1e-8);
  };
  check("typeD-pppp", {}, "2A1");
  check("typeD-ppmm", {{"b0", "1"}}, "A3,8+A1");
  check("typeN-3d", {{"alpha0", "1"}, {"gamma0", "0.5"}}, "A3,2");
  check("typeIII-pppp-sym", {}, "A2,1");
}

TEST_CASE("algebra_name on explicit structure constants") {
  using C = std::vector<std::vector<std::vector<cplx>>>;
  C abelian(2, std::vector<std::vector<cplx>>(2, std::vector<cplx>(2, 0.0)));
  CHECK(algebra_name(abelian) == "2A1");
  C a21 = abelian;
  a21[0][1][1] = 1.0;  // [e1, e2] = e2
  a21[1][0][1] = -1.0;
  CHECK(algebra_name(a21) == "A2,1");
}

TEST_CASE("SD side is type D with C3 = -2 mu0 x^3 structure") {
  auto conv = default_calibration_path();
  ConventionSet cs = load_calibration(conv);
  auto m = fam("typeD-pppp");
  for (const auto& pt : admissible_points(m, 3, 16)) {
    WeylData w = weyl_coefficients(m.metric, cs, pt);
    CHECK(petrov_from_coefficients(w.C).type == "D");
  }
}

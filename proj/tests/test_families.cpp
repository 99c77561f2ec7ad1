#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "phever/families.hpp"

using namespace phever;

namespace {

JetPoint P(cplx q, cplx p, cplx x, cplx s, Chart c = Chart::QPXY) { return {{q, p, x, s}, c}; }

double max_abs(const Mat4& m) {
  double r = 0;
  for (auto& row : m)
    for (auto v : row) r = std::max(r, std::abs(v));
  return r;
}

double max_diff(const Mat4& a, const Mat4& b) {
  double r = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r = std::max(r, std::abs(a[i][j] - b[i][j]));
  return r;
}

// J^T g J with J[mu][a] = d x'^mu / d x^a.
Mat4 pullback(const Mat4& g, const std::array<Jet, 4>& xp) {
  Mat4 J{}, r{};
  for (int mu = 0; mu < 4; ++mu)
    for (int a = 0; a < 4; ++a) {
      MultiIndex e{0, 0, 0, 0};
      e[a] = 1;
      J[mu][a] = xp[mu].partial(e);
    }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      cplx s = 0;
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) s += J[mu][a] * g[mu][nu] * J[nu][b];
      r[a][b] = s;
    }
  return r;
}

std::string poly(std::mt19937_64& rng, const std::string& v, int deg, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::ostringstream os;
  os.precision(17);
  os << u(rng);
  for (int k = 1; k <= deg; ++k) os << " + (" << u(rng) << ")*" << v << "^" << k;
  return os.str();
}

cplx uniform_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.5);
  double re = u(rng);
  return {re, u(rng)};
}

}  // namespace

TEST_CASE("abqs_from_W examples") {
  JetPoint pt = P(0.3, 0.7, 1.2, 0.5);
  cplx x = 1.2, L = 3.0;
  auto zero = abqs_from_W(KeyFunctionSpec::from_text("0", L), pt);
  CHECK(std::abs(zero[0].value() - (x * x * x + L / 6.0)) < 1e-13);
  CHECK(std::abs(zero[1].value()) < 1e-15);
  CHECK(std::abs(zero[2].value()) < 1e-15);

  auto w = abqs_from_W(KeyFunctionSpec::from_text("x^2*y^2/4", L), pt);
  CHECK(std::abs(w[0].value() - (0.5 * x * x * x + L / 6.0)) < 1e-13);
}

TEST_CASE("hh_residual examples") {
  JetPoint pt = P(0.3, 0.7, 1.2, 0.5);
  CHECK(hh_residual(KeyFunctionSpec::from_text("x^2*y^2/4", 0.0), pt).rel() < 1e-13);
  for (cplx L : {cplx(0.0), cplx(3.0), cplx(-1.0, 2.0)})
    CHECK(hh_residual(KeyFunctionSpec::from_text("x^2*y^2/4 - (" + std::to_string(L.real()) + "+" +
                                                     std::to_string(L.imag()) + "i)*y^2/(12*x)",
                                                 L),
                      P(0.4, 0.1, cplx(0.9, 0.3), cplx(0.6, -0.2)))
              .rel() < 1e-12);
  Residual r = hh_residual(KeyFunctionSpec::from_text("x^4", 0.0), P(0.2, 0.3, 1.0, 0.4));
  CHECK(std::abs(r.value - cplx(-3.0)) < 1e-12);
}

TEST_CASE("middle triplet vanishes for key-function A, Q, B") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 50; ++t) {
    std::ostringstream w;
    w.precision(17);
    w << "0";
    for (int i = 0; i <= 3; ++i)
      for (int j = 0; j <= 3 - i; ++j)
        for (int k = 0; k <= 4 - i - j; ++k)
          w << " + (" << u(rng) << ")*q^" << i << "*x^" << j << "*y^" << k;
    cplx L(u(rng), u(rng));
    auto s = KeyFunctionSpec::from_text(w.str(), L);
    JetPoint pt = P(uniform_point(rng), uniform_point(rng), uniform_point(rng), uniform_point(rng));
    auto abq = abqs_from_W(s, pt, 2);
    for (const auto& r : middle_triplet_residuals(abq[0], abq[1], abq[2], pt.coords[2], L)) CHECK(r.rel() < 1e-10);
  }
}

TEST_CASE("middle triplet on non-key-function data") {
  JetPoint pt = P(0.3, 0.7, 1.2, 0.5);
  auto c = coordinate_jets(pt, 2);
  Jet zero = Jet::constant(0.0, 4, 2);
  auto r = middle_triplet_residuals(c[2] * c[2] * c[2], zero, zero, 1.2, 3.0);
  double worst = 0;
  for (const auto& v : r) worst = std::max(worst, std::abs(v.value));
  CHECK(worst > 1e-3);
  for (const auto& v : middle_triplet_residuals(zero, zero, zero, 1.2, 0.0)) CHECK(std::abs(v.value) == 0.0);
}

TEST_CASE("reduced residual examples") {
  auto check = [](const std::string& e, const std::string& dz, cplx L) {
    auto s = EDFamilySpec::from_text(e, dz, L);
    for (cplx q : {cplx(0.3, 0.2), cplx(1.1, -0.4)})
      for (cplx z : {cplx(0.7, 0.1), cplx(0.4, 0.9)}) {
        auto r = reduced_residuals(ed_jets(s, q, z, 4), L);
        CHECK(r[0].rel() < 1e-12);
        CHECK(r[1].rel() < 1e-12);
      }
  };
  check("0", "z^3", 0.0);              // b0 = 0, D_z = H(z)
  check("2*z^2", "z^2*(1/z - 2*q)^3", 0.0);  // typeN-pppp, b0 = 2
  check("z", "0", 0.0);
}

TEST_CASE("typeD-pppp metric is finite and nondegenerate") {
  FamilyModel m = build_family(make_family("typeD-pppp", {{"c0", "1"}, {"d0", "2"}, {"lambda", "3"}}));
  Mat4 g = values(metric_jets(m.metric, P(0.3, 0.7, 1.2, 0.5), 0));
  Eigen::Matrix4cd M;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      CHECK(std::isfinite(std::abs(g[a][b])));
      M(a, b) = g[a][b];
    }
  CHECK(std::abs(M.determinant()) > 1e-3);
}

TEST_CASE("typeD-ppmm with b0 = 0 keeps only the mu0, Lambda terms") {
  FamilyModel m = build_family(make_family("typeD-ppmm", {{"b0", "0"}, {"lambda", "3"}}));
  Expr zero = Expr::parse("0", {"q", "z"});
  MetricField bare = key_function_metric(ed_key_function(zero, zero, Expr::parse("0", {"q"}), 3.0));
  for (auto pt : {P(0.3, 0.7, 1.2, 0.5, m.chart), P(cplx(0.4, 0.2), 0.3, cplx(0.9, -0.1), 1.1, m.chart)})
    CHECK(max_diff(values(metric_jets(m.metric, pt, 0)), values(metric_jets(bare, pt, 0))) < 1e-12);
}

TEST_CASE("ppmm profile matches the partial-fraction closed form") {
  // Z = -2 int_{w0}^{w} ds / (s (q + s)^2) for F = w.
  auto G = [](cplx q, cplx s) { return (std::log(s) - std::log(q + s)) / (q * q) + 1.0 / (q * (q + s)); };
  for (const char* id : {"typeII-ppmm", "typeIII-ppmm"}) {
    FamilyModel m = build_family(make_family(id, {{"F", "w"}}));
    for (auto [q, w] : {std::pair<cplx, cplx>{1.0, 2.0}, {cplx(0.7, 0.3), cplx(1.3, 0.4)}, {cplx(0.4, 1.1), cplx(0.9, 0.6)}}) {
      EDJets ed = m.ed(P(q, 0.5, 1.1, w, Chart::QPXW), 4);
      cplx closed = -2.0 * (G(q, w) - G(q, 1.0));
      CHECK(std::abs(ed.z - closed) < 1e-10);
    }
  }
}

TEST_CASE("gauge: identity and restriction") {
  auto s = KeyFunctionSpec::from_text("x^2*y^2/4 - y^2/(4*x) + q*x*y^3", 3.0);
  Gauge id{Expr::parse("q", {"q"}), Expr::parse("0", {"q"}), Expr::parse("0", {"q"}), Expr::parse("0", {"q"}), 1.0};
  GaugeResult r = gauge_transform(s, id);
  for (auto [q, x, y] : {std::tuple<cplx, cplx, cplx>{0.3, 1.2, 0.5}, {cplx(0.5, 0.2), cplx(0.8, -0.3), 1.4}}) {
    Jet qj = Jet::variable(q, 0, 3, 2), xj = Jet::variable(x, 1, 3, 2), yj = Jet::variable(y, 2, 3, 2);
    Jet a = s.W(qj, xj, yj), b = r.spec.W(qj, xj, yj);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a.coeffs()[k] - b.coeffs()[k]) < 1e-12);
  }
  Gauge bad = id;
  bad.lambda0 = 2.0;
  CHECK_THROWS_AS(gauge_transform(s, bad), GaugeRestriction);
}

TEST_CASE("gauge: z transforms as f z' = z - h_q") {
  Gauge g{Expr::parse("2*q + q^2", {"q"}), Expr::parse("q^3", {"q"}), Expr::parse("0", {"q"}), Expr::parse("0", {"q"}),
          1.0};
  cplx q = 0.4, z = 1.3;
  cplx f = 2.0 + 2.0 * q, hq = 3.0 * q * q;
  CHECK(std::abs(f * transform_z(g, q, z) - (z - hq)) < 1e-14);
}

TEST_CASE("gauge pullback with random cubic gauge functions") {
  std::mt19937_64 rng(5);
  auto s = KeyFunctionSpec::from_text("x^2*y^2/4 - y^2/(4*x) + q*x*y^3 - x^2*q^2*y", 3.0);
  MetricField g0 = key_function_metric(s);
  for (int t = 0; t < 10; ++t) {
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    std::ostringstream qp;
    qp.precision(17);
    qp << "q + (" << u(rng) << ")*q^2 + (" << u(rng) << ")*q^3";
    Gauge g{Expr::parse(qp.str(), {"q"}), Expr::parse(poly(rng, "q", 3), {"q"}), Expr::parse(poly(rng, "q", 3), {"q"}),
            Expr::parse(poly(rng, "q", 3), {"q"}), 1.0};
    GaugeResult r = gauge_transform(s, g);
    MetricField g1 = key_function_metric(r.spec);
    std::uniform_real_distribution<double> box(0.2, 1.5);
    JetPoint pt = P(box(rng), box(rng), box(rng), box(rng));
    auto xp = r.coordinates(pt, 1);
    JetPoint ppt = P(xp[0].value(), xp[1].value(), xp[2].value(), xp[3].value());
    Mat4 lhs = values(metric_jets(g0, pt, 0));
    Mat4 rhs = pullback(values(metric_jets(g1, ppt, 0)), xp);
    CHECK(max_diff(lhs, rhs) <= 1e-9 * std::max(1.0, max_abs(lhs)));
  }
}

TEST_CASE("(E, D) metric is independent of g(q)") {
  auto a = EDFamilySpec::from_text("q*z^3 + z^2", "z^3 + q", 3.0, "0");
  auto b = EDFamilySpec::from_text("q*z^3 + z^2", "z^3 + q", 3.0, "q^3 + 2*q - 1");
  JetPoint pt = P(0.4, 0.3, 1.1, 0.7, Chart::QPXZ);
  CHECK(max_diff(values(metric_jets(ed_metric(a), pt, 0)), values(metric_jets(ed_metric(b), pt, 0))) <= 1e-12);
  Expr E = Expr::parse("q*z^3 + z^2", {"q", "z"}), D = Expr::parse("z^4/4 + q*z", {"q", "z"});
  auto k0 = key_function_metric(ed_key_function(E, D, Expr::parse("0", {"q"}), 3.0));
  auto k1 = key_function_metric(ed_key_function(E, D, Expr::parse("q^3 + 2*q - 1", {"q"}), 3.0));
  JetPoint py = P(0.4, 0.3, 1.1, -0.77);
  CHECK(max_diff(values(metric_jets(k0, py, 0)), values(metric_jets(k1, py, 0))) <= 1e-12);
}

TEST_CASE("(E, D) chart consistency with the key function through y = -x z") {
  Expr E = Expr::parse("q*z^3 + z^2", {"q", "z"}), D = Expr::parse("z^4/4 + q*z", {"q", "z"});
  auto es = EDFamilySpec::from_text("q*z^3 + z^2", "z^3 + q", 3.0);
  MetricField gz = ed_metric(es);
  MetricField gy = key_function_metric(ed_key_function(E, D, Expr::parse("0", {"q"}), 3.0));
  for (auto pt : {P(0.4, 0.3, 1.1, 0.7, Chart::QPXZ), P(cplx(0.3, 0.5), 0.2, cplx(1.2, -0.2), cplx(0.6, 0.4), Chart::QPXZ)}) {
    auto c = coordinate_jets(pt, 1);
    std::array<Jet, 4> xp{c[0], c[1], c[2], -c[2] * c[3]};
    JetPoint py = P(pt.coords[0], pt.coords[1], pt.coords[2], xp[3].value());
    Mat4 lhs = values(metric_jets(gz, pt, 0));
    Mat4 rhs = pullback(values(metric_jets(gy, py, 0)), xp);
    CHECK(max_diff(lhs, rhs) <= 1e-10 * std::max(1.0, max_abs(lhs)));
  }
}

TEST_CASE("Liouville identity for random polynomial F, Q") {
  std::mt19937_64 rng(9);
  int done = 0;
  while (done < 10) {
    Expr F = Expr::parse(poly(rng, "w", 3), {"w"}), Q = Expr::parse(poly(rng, "q", 3), {"q"});
    cplx q = uniform_point(rng), w = uniform_point(rng);
    cplx Fw = F.eval_jet(w, 1).d(0).value(), Qq = Q.eval_jet(q, 1).d(0).value();
    if (std::abs(Fw) < 0.1 || std::abs(Qq) < 0.1 || std::abs(F.eval(w) + Q.eval(q)) < 0.1) continue;
    CHECK(liouville_residual(F, Q, q, w).rel() <= 1e-10);
    ++done;
  }
}

TEST_CASE("Abel identity of the typeII-pppp example") {
  FamilyModel m = build_family(make_family("typeII-pppp", {{"H", "w^2"}}));
  std::mt19937_64 rng(3);
  int done = 0;
  while (done < 10) {
    JetPoint pt = P(uniform_point(rng), uniform_point(rng), uniform_point(rng), uniform_point(rng), Chart::QPXW);
    try {
      m.admit(pt);
    } catch (const FamilyConstraint&) {
      continue;
    }
    for (const auto& [name, r] : m.identities(pt))
      if (name == "abel") CHECK(r.rel() <= 1e-9);
    ++done;
  }
}

TEST_CASE("catalog") {
  CHECK(catalog().size() == 13);
  CHECK(normalize_family_id("type-d-pppp") == "typeD-pppp");
  CHECK(normalize_family_id("type-n-pppp") == "typeN-pppp");
  CHECK(normalize_family_id("typeIII-ppmm-sym") == "typeIII-ppmm-sym");
  CHECK_THROWS_AS(make_family("typeX-pppp"), InvalidArgument);
  CHECK_THROWS_AS(make_family("typeD-pppp", {{"nosuch", "1"}}), InvalidArgument);
  CHECK_THROWS_AS(make_family("typeD-pppp", {{"c0", "q"}}), InvalidArgument);
  FamilySpec s = make_family("typeN-pppp", {{"b0", "2"}});
  CHECK(s.text.at("b0") == "2");
  CHECK(s.text.at("H") == "t^3");
}

TEST_CASE("constraint violations name the constraint") {
  FamilyModel m = build_family(make_family("typeD-pppp"));
  try {
    m.admit(P(0.3, 0.7, 0.0, 0.5));
    FAIL("x = 0 admitted");
  } catch (const FamilyConstraint& e) {
    CHECK(e.constraint == "x");
  }
  FamilyModel z = build_family(make_family("typeIII-ppmm"));
  try {
    z.admit(P(-1.0, 0.7, 1.0, 1.0, Chart::QPXW));  // q + F = 0 at the base point
    FAIL("q + F = 0 admitted");
  } catch (const FamilyConstraint& e) {
    CHECK(e.constraint == "q+F");
  }
  CHECK_THROWS_AS(build_family(make_family("typeII-ppmm", {{"lambda", "0"}})), FamilyConstraint);
}

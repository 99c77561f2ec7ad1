#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "phever/expr.hpp"

using namespace phever;

namespace {

Expr P(const std::string& s, std::vector<std::string> v = {"w"}) { return Expr::parse(s, v); }

std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  if (depth == 0) {
    switch (pick(rng) % 4) {
      case 0: return "w";
      case 1: return "2.5";
      case 2: return "3i";
      default: return "0.125";
    }
  }
  std::string a = random_expr(rng, depth - 1), b = random_expr(rng, depth - 1);
  switch (pick(rng)) {
    case 0: return a + " + " + b;
    case 1: return a + " - " + b;
    case 2: return a + "*" + b;
    case 3: return a + "/(" + b + ")";
    case 4: return "(" + a + ")^2";
    case 5: return "-" + a;
    case 6: return "exp(" + a + ")";
    case 7: return "pow(" + a + ", 3)";
    case 8: return "(" + a + ")^-(" + b + ")";
    default: return "sin(" + a + ") - cos(" + b + ")";
  }
}

}  // namespace

TEST_CASE("parse structure") {
  Expr e = P("w^2 + 1");
  CHECK(e == P("(w^2)+1"));
  CHECK(e.print() == "w^2 + 1");
  Expr f = P("exp(z/(2*0.5))", {"z"});
  CHECK(f.print() == "exp(z/(2*0.5))");
  CHECK(P("2*i*w").eval(3.0) == cplx(0, 6));
  CHECK(P("2^3^2").eval(0.0) == cplx(512));
  CHECK(P("-w^2").eval(3.0) == cplx(-9));
  CHECK(P("2^-1").eval(0.0) == cplx(0.5));
  CHECK(P("1 - 2 - 3").eval(0.0) == cplx(-4));
  CHECK(P("8/4/2").eval(0.0) == cplx(1));
  CHECK(P(" 3.5e-1 *  2 ").eval(0.0) == cplx(0.7));
  CHECK(P("2i").eval(0.0) == cplx(0, 2));
  CHECK(P("1+2i").eval(0.0) == cplx(1, 2));
}

TEST_CASE("parse errors") {
  try {
    P("w + * 2");
    FAIL("no throw");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 4);
    CHECK(std::find(e.expected().begin(), e.expected().end(), "number") != e.expected().end());
  }
  try {
    P("w + foo(2)");
    FAIL("no throw");
  } catch (const UnknownIdentifier& e) {
    CHECK(e.name() == "foo");
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(P("(w + 1"), SyntaxError);
  CHECK_THROWS_AS(P("pow(w)"), SyntaxError);
  CHECK_THROWS_AS(P("w w"), SyntaxError);
  CHECK_THROWS_AS(P("exp w"), SyntaxError);
  CHECK_THROWS_AS(P(""), SyntaxError);
  CHECK_THROWS_AS(P("z", {"w"}), UnknownIdentifier);
}

TEST_CASE("jet evaluation") {
  Jet j = P("w^3").eval_jet(2.0, 3);
  CHECK(j.value() == cplx(8));
  CHECK(j.partial({1, 0, 0, 0}) == cplx(12));
  CHECK(j.partial({2, 0, 0, 0}) == cplx(12));
  CHECK(j.partial({3, 0, 0, 0}) == cplx(6));
  Jet l = P("ln(w)").eval_jet(1.0, 2);
  CHECK(std::abs(l.value()) < 1e-15);
  CHECK(std::abs(l.partial({1, 0, 0, 0}) - 1.0) < 1e-15);
  CHECK(std::abs(l.coeff({2, 0, 0, 0}) + 0.5) < 1e-15);
  CHECK(std::abs(l.partial({2, 0, 0, 0}) + 1.0) < 1e-15);
  CHECK_THROWS_AS(P("ln(w)").eval_jet(-1.0, 1), BranchAmbiguity);
  CHECK_THROWS_AS(P("1/w").eval_jet(0.0, 1), SingularEvaluation);
  CHECK_THROWS_AS(P("w").eval_jet(1.0, -1), InvalidArgument);
}

TEST_CASE("random polynomials against finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 30; ++t) {
    std::string s = "0";
    double c[5];
    for (int k = 0; k < 5; ++k) {
      c[k] = u(rng);
      s += " + " + std::to_string(c[k]) + "*w^" + std::to_string(k);
    }
    Expr e = P(s);
    cplx w0(u(rng), u(rng));
    Jet j = e.eval_jet(w0, 2);
    double h = 1e-4;
    cplx d1 = (e.eval(w0 + h) - e.eval(w0 - h)) / (2 * h);
    cplx d2 = (e.eval(w0 + h) - 2.0 * e.eval(w0) + e.eval(w0 - h)) / (h * h);
    CHECK(std::abs(j.partial({1, 0, 0, 0}) - d1) <= 1e-6 * std::max(1.0, std::abs(d1)));
    CHECK(std::abs(j.partial({2, 0, 0, 0}) - d2) <= 1e-6 * std::max(1.0, std::abs(d2)));
  }
}

TEST_CASE("print round trip") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 300; ++t) {
    Expr e = P(random_expr(rng, 1 + t % 4));
    Expr r = P(e.print());
    CHECK(r == e);
    CHECK(r.print() == e.print());
  }
  for (const char* s : {"-w^2", "(-w)^2", "w^-2", "a - (b - c)", "a/(b*c)", "(a + b)*c", "--a", "2i^2", "i*a"}) {
    Expr e = P(s, {"a", "b", "c", "w"});
    CHECK(P(e.print(), {"a", "b", "c", "w"}) == e);
  }
}

TEST_CASE("linearity") {
  Expr f = P("sin(w)*w"), g = P("exp(w) - w^3"), comb = P("(2-i)*(sin(w)*w) + (exp(w) - w^3)");
  Jet jf = f.eval_jet(0.7, 4), jg = g.eval_jet(0.7, 4), jc = comb.eval_jet(0.7, 4);
  for (std::size_t k = 0; k < jc.size(); ++k)
    CHECK(std::abs(jc.coeffs()[k] - (xcplx(2, -1) * jf.coeffs()[k] + jg.coeffs()[k])) < 1e-14);
}

TEST_CASE("several variables") {
  Expr e = P("q*z^2 + exp(q)", {"q", "z"});
  Jet q = Jet::variable(0.5, 0, 2, 3), z = Jet::variable(2.0, 1, 2, 3);
  Jet r = e.eval({q, z});
  CHECK(std::abs(r.partial({1, 2, 0, 0}) - 2.0) < 1e-14);
  CHECK(e.depends_on(1));
  CHECK_FALSE(P("q + 1", {"q", "z"}).depends_on(1));
}

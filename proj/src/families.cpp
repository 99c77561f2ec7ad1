#include "phever/families.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace phever {

namespace {

constexpr double kMargin = 0.1;

Jet cst(cplx v, const Jet& like) { return Jet::constant(v, like.nvars(), like.order()); }

// Denominator of a family construct; rejected under an admission guard when too small.
const Jet& den(const std::string& name, const Jet& d) {
  double m = admission_margin();
  if (m > 0 && std::abs(d.value()) < m) throw FamilyConstraint(name, "|" + name + "| < " + std::to_string(m));
  return d;
}

// k-th derivative of a one-variable expression, composed with `arg`.
Jet derived(const Expr& e, const Jet& arg, int k) {
  Jet u = e.eval_jet(arg.value(), arg.order() + k);
  for (int i = 0; i < k; ++i) u = u.d(0);
  return compose(u, {arg});
}

Jet call(const Expr& e, const Jet& arg) { return e.eval(std::vector<Jet>{arg}); }
Jet call(const Expr& e, const Jet& a, const Jet& b) { return e.eval(std::vector<Jet>{a, b}); }

// Tetrad of the metric x^-2 { -dp dx - Zv dq dx - x Zs dq ds + Cpp dp^2 + Cpq dp dq + Cqq dq^2 }
// in a chart (q,p,x,s), where Zv is the coordinate function z and Zs its s-derivative.
JetMat4 walker_tetrad(const Jet& x, const Jet& zv, const Jet& zs, const Jet& cpp, const Jet& cpq, const Jet& cqq) {
  int ord = std::min({x.order(), zv.order(), zs.order(), cpp.order(), cpq.order(), cqq.order()});
  Jet X = x.truncated(ord);
  Jet zero = Jet::constant(0.0, x.nvars(), ord), one = Jet::constant(1.0, x.nvars(), ord);
  Jet xi2 = reciprocal(X * X);
  Jet h = cpq.truncated(ord) * 0.5;
  JetMat4 e;
  e[0] = {-xi2, zero, zero, zero};
  e[1] = {-cqq.truncated(ord), -h, zv.truncated(ord), X * zs.truncated(ord)};
  e[2] = {zero, xi2, zero, zero};
  e[3] = {h, cpp.truncated(ord), -one, zero};
  return e;
}

// A, Q, B of the (E, D) metric from jets of E, E_zz, D_z, D_zz, x and z.
std::array<Jet, 3> abq_from_ed(const Jet& x, const Jet& z, const Jet& E, const Jet& Ezz, const Jet& Dz, const Jet& Dzz,
                               cplx lambda, cplx mu0) {
  Jet p0 = 0.5 * mu0 * x * x * x + lambda / 3.0;
  Jet x2 = x * x;
  Jet A = p0 + 0.5 * x * Ezz + x2 * Dzz;
  Jet Q = -p0 * z - 0.5 * x * z * Ezz + x2 * (Dz - z * Dzz);
  Jet B = p0 * z * z - 0.5 * x * (2.0 * E - z * z * Ezz) + x2 * (z * z * Dzz - 2.0 * z * Dz);
  return {A, Q, B};
}

std::string lower_alnum(const std::string& s) {
  std::string r;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) r += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return r;
}

cplx eval_constant(const std::string& name, const std::string& text) {
  try {
    Expr e = Expr::parse(text, {"q"});
    if (e.depends_on(0)) throw InvalidArgument("must be a constant");
    return e.eval(cplx(0.0));
  } catch (const Error& e) {
    throw InvalidArgument("parameter '" + name + "': " + e.what());
  }
}

}  // namespace

// ---- key function ----

KeyFunctionSpec KeyFunctionSpec::from_text(const std::string& w, cplx lambda, cplx mu0) {
  Expr e = Expr::parse(w, {"q", "x", "y"});
  KeyFunctionSpec s;
  s.W = [e](const Jet& q, const Jet& x, const Jet& y) { return e.eval(std::vector<Jet>{q, x, y}); };
  s.lambda = lambda;
  s.mu0 = mu0;
  return s;
}

std::array<Jet, 3> abqs_from_W(const KeyFunctionSpec& s, const JetPoint& pt, int order) {
  auto c = coordinate_jets(pt, order + 2);
  Jet W = s.W(c[0], c[2], c[3]);
  Jet Wx = W.d(2), Wy = W.d(3);
  Jet x = c[2].truncated(order);
  Jet A = -x * Wy.d(3) + s.mu0 * x * x * x + s.lambda / 6.0;
  Jet Q = x * Wx.d(3) - Wy.truncated(order);
  Jet B = -x * Wx.d(2) + 2.0 * Wx.truncated(order);
  return {A, Q, B};
}

MetricField key_function_metric(const KeyFunctionSpec& s) {
  MetricField m;
  m.chart = Chart::QPXY;
  m.tetrad = [s](const JetPoint& pt, int order) {
    auto f = abqs_from_W(s, pt, order);
    return hh_tetrad(lift(pt, 2, order), f[0], f[1], f[2]);
  };
  return m;
}

Residual hh_residual(const KeyFunctionSpec& s, const JetPoint& pt) {
  auto c = coordinate_jets(pt, 2);
  Jet W = s.W(c[0], c[2], c[3]);
  cplx x = pt.coords[2];
  auto P = [&](int q, int xx, int y) { return W.partial({q, 0, xx, y}); };
  cplx wxx = P(0, 2, 0), wyy = P(0, 0, 2), wxy = P(0, 1, 1), wx = P(0, 1, 0), wy = P(0, 0, 1), wqy = P(1, 0, 1);
  cplx w = W.value();
  std::array<cplx, 7> terms = {wxx * wyy,
                               -wxy * wxy,
                               2.0 / x * (wy * wxy - wx * wyy),
                               wqy / x,
                               -s.mu0 * x * x * wxx,
                               s.mu0 * (3.0 * x * wx - 3.0 * w),
                               -s.lambda / (6.0 * x) * wxx};
  Residual r;
  for (auto t : terms) {
    r.value += t;
    r.scale = std::max(r.scale, std::abs(t));
  }
  return r;
}

std::array<Residual, 4> middle_triplet_residuals(const Jet& A, const Jet& Q, const Jet& B, cplx x, cplx lambda) {
  auto P = [](const Jet& f, int xx, int y) { return f.partial({0, 0, xx, y}); };
  auto sum = [](std::initializer_list<cplx> ts) {
    Residual r;
    for (auto t : ts) {
      r.value += t;
      r.scale = std::max(r.scale, std::abs(t));
    }
    return r;
  };
  cplx x2 = x * x;
  return {sum({x2 * P(A, 2, 0), 2.0 * x2 * P(Q, 1, 1), x2 * P(B, 0, 2), 12.0 * A.value(), -6.0 * x * P(A, 1, 0),
               -6.0 * x * P(Q, 0, 1), -2.0 * lambda}),
          sum({x2 * P(B, 1, 1), x2 * P(Q, 2, 0), -2.0 * x * P(Q, 1, 0)}),
          sum({x2 * P(B, 0, 2), -x2 * P(A, 2, 0), -2.0 * x * P(Q, 0, 1), 2.0 * x * P(A, 1, 0)}),
          sum({x2 * P(Q, 0, 2), x2 * P(A, 1, 1), -2.0 * x * P(A, 0, 1)})};
}

// ---- gauge ----

namespace {

struct GaugeJets {
  Jet f, fq, hq, hqf_q, sigq, sigma, h, L, M, qp;
};

// One-variable jets of the gauge functions at q0, each of order `ord`.
GaugeJets gauge_jets(const Gauge& g, cplx q0, int ord, cplx lambda, cplx mu0) {
  GaugeJets j;
  Jet qp = g.qprime.eval_jet(q0, ord + 3);
  j.qp = qp.truncated(ord);
  Jet f = qp.d(0);
  j.f = f.truncated(ord);
  j.fq = f.d(0).truncated(ord);
  Jet h = g.h.eval_jet(q0, ord + 3);
  j.h = h.truncated(ord);
  Jet hq = h.d(0);
  j.hq = hq.truncated(ord);
  j.hqf_q = (hq / f).d(0).truncated(ord);
  Jet sg = g.sigma.eval_jet(q0, ord + 1);
  j.sigma = sg.truncated(ord);
  j.sigq = sg.d(0);
  j.L = g.L.eval_jet(q0, ord);
  Jet fm = pow(f, cplx(-0.5));
  j.M = mu0 == cplx(0.0) ? 0.0 * j.L : ((sqrt(f) * fm.d(0).d(0)).truncated(ord) - lambda / 3.0 * j.L) / (3.0 * mu0);
  return j;
}

cplx solve_q(const Expr& qprime, cplx target) {
  cplx q = target;
  for (int it = 0; it < 100; ++it) {
    Jet j = qprime.eval_jet(q, 1);
    cplx step = (j.value() - target) / j.partial({1, 0, 0, 0});
    q -= step;
    if (std::abs(step) < 1e-15 * (1 + std::abs(q))) break;
  }
  return q;
}

}  // namespace

GaugeResult gauge_transform(const KeyFunctionSpec& s, const Gauge& g) {
  if (g.lambda0 == cplx(0.0)) throw GaugeRestriction("lambda0 must be nonzero");
  if (s.mu0 == cplx(1.0) && g.lambda0 != cplx(1.0))
    throw GaugeRestriction("with mu0 = 1 the gauge is restricted to lambda0 = 1");
  cplx l0 = g.lambda0, sl0 = std::sqrt(l0);
  GaugeResult out;
  out.spec.lambda = s.lambda;
  out.spec.mu0 = std::pow(l0, 1.5) * s.mu0;
  KeyFunction W = s.W;
  cplx lambda = s.lambda, mu0 = s.mu0;
  out.spec.W = [W, g, l0, sl0, lambda, mu0](const Jet& qp, const Jet& xp, const Jet& yp) {
    int ord = qp.order();
    cplx q0 = solve_q(g.qprime, qp.value());
    GaugeJets j = gauge_jets(g, q0, ord, lambda, mu0);
    Jet qinv = invert({j.qp}, {q0})[0];
    Jet q = compose(qinv, {qp});
    auto at = [&](const Jet& u) { return compose(u, {q}); };
    Jet f = at(j.f), fq = at(j.fq), hq = at(j.hq), hqf_q = at(j.hqf_q), sigq = at(j.sigq), sigma = at(j.sigma),
        L = at(j.L), M = at(j.M);
    Jet x = sl0 * xp;
    Jet y = l0 * f * (yp - sigma) - sl0 * hq * x;
    Jet x2 = x * x, x3 = x2 * x;
    Jet rhs = W(q, x, y) + 0.5 * mu0 * sl0 * hq * (x3 * y + 0.5 * sl0 * hq * x2 * x2) - L * x3 / 3.0 +
              0.5 * fq / f * x * y - 0.5 * sl0 * f * hqf_q * x2 - lambda / 6.0 * sl0 * hq * y -
              (0.5 * l0 * f * sigq + lambda / 12.0 * l0 * hq * hq) * x - M;
    return rhs / (f * f * std::pow(l0, 1.5));
  };
  out.coordinates = [g, l0, sl0, lambda, mu0](const JetPoint& pt, int order) {
    auto c = coordinate_jets(pt, order);
    GaugeJets j = gauge_jets(g, pt.coords[0], order, lambda, mu0);
    auto at = [&](const Jet& u) { return compose(u, {c[0]}); };
    Jet f = at(j.f), hq = at(j.hq);
    std::array<Jet, 4> r;
    r[0] = at(j.qp);
    r[1] = c[1] / sl0 + at(j.h);
    r[2] = c[2] / sl0;
    r[3] = (c[3] / l0 + hq * c[2] / sl0) / f + at(j.sigma);
    return r;
  };
  return out;
}

cplx transform_z(const Gauge& g, cplx q, cplx z) {
  Jet qp = g.qprime.eval_jet(q, 1), h = g.h.eval_jet(q, 1);
  return (z - h.partial({1, 0, 0, 0})) / qp.partial({1, 0, 0, 0});
}

// ---- (E, D) ----

EDFamilySpec EDFamilySpec::from_text(const std::string& e, const std::string& dz, cplx lambda, const std::string& g) {
  EDFamilySpec s;
  s.E = Expr::parse(e, {"q", "z"});
  s.Dz = Expr::parse(dz, {"q", "z"});
  s.g = Expr::parse(g, {"q"});
  s.lambda = lambda;
  return s;
}

EDJets ed_jets(const EDFamilySpec& s, cplx q, cplx z, int order) {
  Jet qj = Jet::variable(q, 0, 2, order), zj = Jet::variable(z, 1, 2, order);
  return {call(s.E, qj, zj), call(s.Dz, qj, zj), q, z};
}

KeyFunctionSpec ed_key_function(const Expr& E, const Expr& D, const Expr& g, cplx lambda, cplx mu0) {
  KeyFunctionSpec s;
  s.lambda = lambda;
  s.mu0 = mu0;
  s.W = [E, D, g, lambda, mu0](const Jet& q, const Jet& x, const Jet& y) {
    Jet z = -y / x;
    Jet x2 = x * x;
    return 0.25 * mu0 * x2 * y * y - lambda / 12.0 * y * y / x - 0.5 * x2 * call(E, q, z) - x2 * x * call(D, q, z) +
           call(g, q);
  };
  return s;
}

MetricField ed_metric(const EDFamilySpec& s) {
  MetricField m;
  m.chart = Chart::QPXZ;
  m.tetrad = [s](const JetPoint& pt, int order) {
    auto c = coordinate_jets(pt, order + 2);
    Jet E2 = call(s.E, c[0], c[3]), D1 = call(s.Dz, c[0], c[3]);
    Jet x = c[2].truncated(order), z = c[3].truncated(order);
    auto f = abq_from_ed(x, z, E2.truncated(order), E2.d(3).d(3), D1.truncated(order), D1.d(3).truncated(order),
                         s.lambda, s.mu0);
    Jet one = cst(1.0, x);
    return walker_tetrad(x, z, one, f[0], -2.0 * f[1], f[2]);
  };
  return m;
}

std::array<Jet, 3> ed_abq(const EDJets& ed, const JetPoint& qpxy, cplx lambda, cplx mu0, int order) {
  if (ed.E.order() < order + 2 || ed.Dz.order() < order + 1)
    throw InvalidArgument("ed_abq: (E, D_z) jets of insufficient order");
  auto c = coordinate_jets(qpxy, order);
  Jet z = -c[3] / c[2];
  std::vector<Jet> in = {c[0], z};
  Jet Ez = ed.E.d(1), Dzz = ed.Dz.d(1);
  return abq_from_ed(c[2], z, compose(ed.E, in), compose(Ez.d(1), in), compose(ed.Dz, in), compose(Dzz, in), lambda,
                     mu0);
}

std::array<Residual, 2> reduced_residuals(const EDJets& ed, cplx lambda) {
  auto E = [&](int q, int z) { return ed.E.partial({q, z, 0, 0}); };
  auto D = [&](int q, int z) { return ed.Dz.partial({q, z, 0, 0}); };
  auto sum = [](std::initializer_list<cplx> ts) {
    Residual r;
    for (auto t : ts) {
      r.value += t;
      r.scale = std::max(r.scale, std::abs(t));
    }
    return r;
  };
  return {sum({E(0, 0) * E(0, 3), -E(1, 2), -2.0 * lambda * D(0, 0)}),
          sum({D(1, 0), -E(0, 0) * D(0, 1), D(0, 0) * E(0, 1)})};
}

std::array<cplx, 5> cdot_from_ed(const EDJets& ed, cplx x, cplx y, cplx lambda) {
  cplx e3 = ed.E.partial({0, 3, 0, 0}), e4 = ed.E.partial({0, 4, 0, 0}), d4 = ed.Dz.partial({0, 3, 0, 0});
  cplx c1 = -2.0 * x * x * d4 - x * e4;
  cplx r = y / x;
  return {c1, -x * e3 - r * c1, -2.0 * lambda / 3.0 + 2.0 * y * e3 + r * r * c1,
          2.0 * lambda * r - 3.0 * y * y / x * e3 - r * r * r * c1,
          -4.0 * lambda * r * r + 4.0 * y * y * y / (x * x) * e3 + r * r * r * r * c1};
}

// ---- symmetry vectors ----

SymmetryVector symmetry_from_text(const std::string& name, const std::string& a, const std::string& c,
                                  const std::string& eps, const std::string& alpha, cplx chi0) {
  auto fn = [](const std::string& t) {
    Expr e = Expr::parse(t, {"q"});
    return std::function<Jet(const Jet&)>([e](const Jet& q) { return call(e, q); });
  };
  return {name, chi0, fn(a), fn(c), fn(eps), fn(alpha)};
}

std::array<Jet, 4> vector_field(const FamilyModel& m, const SymmetryVector& k, const JetPoint& pt, int order) {
  auto c = coordinate_jets(pt, order + 1);
  Jet Y = m.y_of(pt, order + 1);
  const Jet& q = c[0];
  Jet a = k.a(q), cc = k.c(q);
  Jet two3 = cst(2.0 / 3.0 * k.chi0, q);
  std::array<Jet, 4> K;
  K[0] = a.truncated(order);
  K[1] = (cc + 2.0 * two3 * c[1]).truncated(order);
  K[2] = (-two3 * c[2]).truncated(order);
  Jet Ky = cc.d(0) * c[2].truncated(order) - a.d(0) * Y.truncated(order) - k.eps(q).truncated(order) +
           (two3 * Y).truncated(order);
  if (m.chart == Chart::QPXY) {
    K[3] = Ky;
    return K;
  }
  Jet Ys = Y.d(3);
  K[3] = (Ky - Y.d(0) * K[0] - Y.d(1) * K[1] - Y.d(2) * K[2]) / Ys;
  return K;
}

JetPoint to_qpxy(const FamilyModel& m, const JetPoint& pt) {
  JetPoint r = pt;
  r.chart = Chart::QPXY;
  r.coords[3] = m.y_of(pt, 0).value();
  return r;
}

Residual liouville_residual(const Expr& F, const Expr& Q, cplx q, cplx w) {
  Jet qj = Jet::variable(q, 0, 2, 3), wj = Jet::variable(w, 1, 2, 3);
  Jet Fj = call(F, wj), Qj = call(Q, qj);
  Jet s = Fj + Qj;
  Jet H = -2.0 * Fj.d(1) * Qj.d(0) / (s * s).truncated(2);
  Jet ratio = H.d(0) / H.truncated(1);
  cplx lhs = H.value(), rhs = -ratio.partial({0, 1, 0, 0});
  return {lhs - rhs, std::max(std::abs(lhs), std::abs(rhs))};
}

// ---- catalog ----

std::string FamilyInfo::signature() const {
  std::string s;
  for (const auto& p : params) {
    if (!s.empty()) s += ' ';
    s += p.name;
    if (!p.var.empty()) s += "(" + p.var + ")";
    s += "=" + p.fallback;
  }
  return s;
}

const std::vector<FamilyInfo>& catalog() {
  static const std::vector<FamilyInfo> c = {
      {"generic-W", "[D]^ee x [any]: key function W(q,x,y)", Chart::QPXY,
       {{"W", "q,x,y", "x^2*y^2/4 - y^2/(4*x)", "key function"}, {"lambda", "", "3", "cosmological constant"}},
       "", ""},
      {"ed-generic", "{[D]^ee x [deg]^n}: E(q,z), D_z(q,z)", Chart::QPXZ,
       {{"E", "q,z", "z^3 + z + 2", "function E"},
        {"Dz", "q,z", "z^3 + z + 2", "function D_z"},
        {"lambda", "", "3", "cosmological constant"}},
       "", ""},
      {"typeII-pppp", "{[D]^ee x [II]^n, [++,++]}", Chart::QPXW,
       {{"lambda", "", "1", "cosmological constant"},
        {"Q", "q", "q", "function Q(q) of the Abel example"},
        {"H", "w", "w^2", "function H(w) of the Abel example"},
        {"w0", "", "1", "integration base point"}},
       "II", "[++,++]"},
      {"typeII-ppmm", "{[D]^ee x [II]^n, [++,--]}", Chart::QPXW,
       {{"lambda", "", "1", "cosmological constant"}, {"F", "w", "w", "function F(w)"}, {"w0", "", "1", "integration base point"}},
       "II", "[++,--]"},
      {"typeD-pppp", "{[D]^ee x [D]^nn, [++,++,++,++]}", Chart::QPXY,
       {{"lambda", "", "3", "cosmological constant"}, {"c0", "", "1", "constant c0"}, {"d0", "", "2", "constant d0"}},
       "D", "[++,++,++,++]"},
      {"typeD-ppmm", "{[D]^ee x [D]^nn, [++,--,--,++]}", Chart::QPXY,
       {{"lambda", "", "3", "cosmological constant"}, {"b0", "", "1", "constant b0"}},
       "D", "[++,--,--,++]"},
      {"typeIII-pppp", "{[D]^ee x [III]^n, [++,++]}", Chart::QPXW,
       {{"S", "w", "w^2", "function S(w)"}, {"F", "w", "w", "function F(w)"}, {"w0", "", "1", "integration base point"}},
       "III", "[++,++]"},
      {"typeIII-pppp-sym", "{[D]^ee x [III]^n, [++,++]} with A2,1", Chart::QPXW,
       {{"chi0", "", "0.75", "homothety constant"}, {"Z0", "", "1", "constant Z0"}, {"w0", "", "1", "integration base point"}},
       "III", "[++,++]"},
      {"typeIII-ppmm", "{[D]^ee x [III]^n, [++,--]}", Chart::QPXW,
       {{"F", "w", "w", "function F(w)"}, {"w0", "", "1", "integration base point"}},
       "III", "[++,--]"},
      {"typeIII-ppmm-sym", "{[D]^ee x [III]^n, [++,--]} with A2,1", Chart::QPXW,
       {{"chi0", "", "0.75", "homothety constant"}, {"w0", "", "1", "integration base point"}},
       "III", "[++,--]"},
      {"typeN-pppp", "{[D]^ee x [N]^n, [++,++]}", Chart::QPXZ,
       {{"H", "t", "t^3", "function H(t), t = 1/z - b0 q"}, {"b0", "", "1", "constant b0"}},
       "N", "[++,++]"},
      {"typeN-2d", "{[D]^ee x [N]^n, [++,++]} with 2A1", Chart::QPXZ,
       {{"H", "z", "z^3", "function H(z)"}},
       "N", "[++,++]"},
      {"typeN-3d", "{[D]^ee x [N]^n, [++,++]} with a 3D algebra", Chart::QPXZ,
       {{"alpha0", "", "0.25", "constant alpha0"}, {"gamma0", "", "0.5", "constant gamma0"}, {"H0", "", "1", "constant H0"}},
       "N", "[++,++]"},
  };
  return c;
}

const FamilyInfo& nonexistence_family() {
  static const FamilyInfo f{"typeN-ppmm",
                            "{[D]^ee x [N]^n, [++,--]} (claimed not to exist)",
                            Chart::QPXZ,
                            {{"b0", "", "1", "E = b0 z^2 + c0 z + d0"}, {"c0", "", "0", "constant c0"}, {"d0", "", "0", "constant d0"}},
                            "O",
                            "[++,--]",
                            true};
  return f;
}

std::string normalize_family_id(const std::string& raw) {
  std::string key = lower_alnum(raw);
  for (const auto& f : catalog())
    if (lower_alnum(f.id) == key) return f.id;
  if (lower_alnum(nonexistence_family().id) == key) return nonexistence_family().id;
  throw InvalidArgument("unknown family '" + raw + "' (see list-families)");
}

const FamilyInfo& family_info(const std::string& id) {
  std::string n = normalize_family_id(id);
  for (const auto& f : catalog())
    if (f.id == n) return f;
  return nonexistence_family();
}

cplx FamilySpec::constant(const std::string& name) const {
  auto it = constants.find(name);
  if (it == constants.end()) throw InvalidArgument("family " + id + " has no constant '" + name + "'");
  return it->second;
}

const Expr& FamilySpec::function(const std::string& name) const {
  auto it = functions.find(name);
  if (it == functions.end()) throw InvalidArgument("family " + id + " has no function '" + name + "'");
  return it->second;
}

FamilySpec make_family(const std::string& id, const std::vector<std::pair<std::string, std::string>>& sets) {
  const FamilyInfo& info = family_info(id);
  FamilySpec s;
  s.id = info.id;
  for (const auto& p : info.params) s.text[p.name] = p.fallback;
  for (const auto& [k, v] : sets) {
    auto it = std::find_if(info.params.begin(), info.params.end(), [&](const ParamInfo& p) { return p.name == k; });
    if (it == info.params.end()) {
      std::string names;
      for (const auto& p : info.params) names += (names.empty() ? "" : ", ") + p.name;
      throw InvalidArgument("unknown parameter '" + k + "' for family " + info.id + " (expected one of: " + names + ")");
    }
    s.text[k] = v;
  }
  for (const auto& p : info.params) {
    const std::string& t = s.text[p.name];
    if (p.var.empty()) {
      s.constants[p.name] = eval_constant(p.name, t);
    } else {
      std::vector<std::string> vars;
      std::stringstream ss(p.var);
      std::string v;
      while (std::getline(ss, v, ',')) vars.push_back(v);
      try {
        s.functions[p.name] = Expr::parse(t, vars);
      } catch (const Error& e) {
        throw InvalidArgument("parameter '" + p.name + "': " + e.what());
      }
    }
  }
  return s;
}

// ---- family models ----

namespace {

// Profile-defined families in the chart (q,p,x,w).
struct WalkerW {
  ProfileIntegrand integrand;                             // Z_w(q, w)
  std::function<Jet(const Jet& q, const Jet& w)> ezz;     // E_zz(q, w)
  bool with_d = true;                                     // D_z = Z_w (otherwise D_z = 0)
  cplx w0 = 1.0;
  cplx lambda = 0, mu0 = 1.0;
  QuadOptions opt;

  Jet Z(cplx q, cplx w, int order) const {
    IntegralProfile p;
    p.integrand = integrand;
    p.w0 = w0;
    p.opt = opt;
    return integrate(p, q, w, order);
  }
  Jet Z4(const JetPoint& pt, int order) const { return Z(pt.coords[0], pt.coords[3], order).embed(4, {0, 3, 0, 0}); }

  JetMat4 tetrad(const JetPoint& pt, int order) const {
    auto c = coordinate_jets(pt, order);
    Jet z = Z4(pt, order + 2);
    Jet zw = z.d(3), zww = zw.d(3);
    Jet Zv = z.truncated(order), Zw = zw.truncated(order);
    const Jet& x = c[2];
    Jet s = ezz(c[0], c[3]);
    Jet p0 = 0.5 * mu0 * x * x * x + lambda / 3.0;
    Jet cpp = p0 + 0.5 * x * s, cpq = 2.0 * (p0 * Zv + 0.5 * x * Zv * s), cqq = p0 * Zv * Zv + 0.5 * x * Zv * Zv * s;
    if (with_d) {
      Jet r = zww / Zw;
      Jet x2 = x * x;
      cpp += x2 * r;
      cpq -= 2.0 * x2 * (Zw - Zv * r);
      cqq += x2 * (Zv * Zv * r - 2.0 * Zv * Zw);
    }
    return walker_tetrad(x, Zv, Zw, cpp, cpq, cqq);
  }

  EDJets ed(const JetPoint& pt, int order) const {
    cplx q = pt.coords[0], w = pt.coords[3];
    Jet z = Z(q, w, order + 1);
    Jet E = -z.d(0), D = with_d ? z.d(1) : Jet::constant(0.0, 2, order);
    auto inv = invert({Jet::variable(q, 0, 2, order), z.truncated(order)}, {q, w});
    return {compose(E, inv), compose(D, inv), q, z.value()};
  }

  void admit(const JetPoint& pt) const {
    AdmissionGuard guard(kMargin);
    den("x", Jet::constant(pt.coords[2], 1, 0));
    cplx q = pt.coords[0], w = pt.coords[3];
    Jet qj = Jet::constant(q, 1, 0);
    const int n = 32;
    try {
      for (int k = 0; k <= n; ++k) integrand(qj, Jet::constant(w0 + (w - w0) * (static_cast<double>(k) / n), 1, 0));
      ezz(qj, Jet::constant(w, 1, 0));
    } catch (const BranchAmbiguity& e) {
      throw FamilyConstraint("branch cut", e.what());
    } catch (const SingularEvaluation& e) {
      throw FamilyConstraint("singular integrand", e.what());
    }
    den("Z_w", integrand(qj, Jet::constant(w, 1, 0)));
    QuadOptions o = opt;
    o.max_depth = 25;
    o.max_intervals = 500;
    IntegralProfile p{integrand, w0, o};
    try {
      integrate(p, q, w, 5);
    } catch (const QuadratureFailure& e) {
      throw FamilyConstraint("quadrature path", e.what());
    } catch (const BranchAmbiguity& e) {
      throw FamilyConstraint("branch cut", e.what());
    } catch (const SingularEvaluation& e) {
      throw FamilyConstraint("singular integrand", e.what());
    }
  }
};

// y = -x Z(q, w) in chart variables.
std::function<Jet(const JetPoint&, int)> walker_y(std::shared_ptr<WalkerW> ww) {
  return [ww](const JetPoint& pt, int order) { return -lift(pt, 2, order) * ww->Z4(pt, order); };
}

void install_walker(FamilyModel& m, std::shared_ptr<WalkerW> ww) {
  m.chart = Chart::QPXW;
  m.metric.chart = Chart::QPXW;
  m.metric.tetrad = [ww](const JetPoint& pt, int order) { return ww->tetrad(pt, order); };
  m.ed = [ww](const JetPoint& pt, int order) { return ww->ed(pt, order); };
  m.y_of = walker_y(ww);
  m.admit = [ww](const JetPoint& pt) { ww->admit(pt); };
}

std::function<Jet(const Jet&)> const_fn(cplx v) {
  return [v](const Jet& q) { return cst(v, q); };
}
std::function<Jet(const Jet&)> poly_fn(std::vector<cplx> coeffs) {
  return [coeffs](const Jet& q) {
    Jet r = cst(0.0, q);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) r = r * q + *it;
    return r;
  };
}

SymmetryVector killing(const std::string& name, std::vector<cplx> a, std::vector<cplx> c, cplx chi0 = 0) {
  return {name, chi0, poly_fn(std::move(a)), poly_fn(std::move(c)), const_fn(0.0), const_fn(0.0)};
}

// Antiderivative of beta from q = 1, as a function of a jet in q.
std::function<Jet(const Jet&)> antiderivative(std::function<Jet(const Jet&)> beta) {
  return [beta](const Jet& q) {
    int n = q.order();
    cplx q0 = q.value();
    auto r = integrate_segment([&](cplx s) { return beta(Jet::constant(s, 1, 0)); }, 1.0, q0);
    Jet u(1, n);
    u.set_coeff({0, 0, 0, 0}, r.value.value());
    if (n >= 1) {
      Jet b = beta(Jet::variable(q0, 0, 1, n - 1));
      for (int k = 0; k < n; ++k) u.set_coeff({k + 1, 0, 0, 0}, b.coeff({k, 0, 0, 0}) / static_cast<double>(k + 1));
    }
    return compose(u, {q});
  };
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Name of A3,5 with the ratio brought into the unit disc.
std::string a35_name(cplx ratio) {
  if (std::abs(ratio) > 1) ratio = 1.0 / ratio;
  std::string s = "A3,5(alpha=" + fmt_num(ratio.real());
  if (std::abs(ratio.imag()) > 1e-12) s += (ratio.imag() > 0 ? "+" : "-") + fmt_num(std::abs(ratio.imag())) + "i";
  return s + ")";
}

void require(bool ok, const std::string& name, const std::string& detail) {
  if (!ok) throw FamilyConstraint(name, detail);
}

void admit_guarded(const JetPoint& pt, const std::function<void()>& body) {
  AdmissionGuard guard(kMargin);
  den("x", Jet::constant(pt.coords[2], 1, 0));
  try {
    body();
  } catch (const BranchAmbiguity& e) {
    throw FamilyConstraint("branch cut", e.what());
  } catch (const SingularEvaluation& e) {
    throw FamilyConstraint("singular coefficient", e.what());
  }
}

void qpxz_common(FamilyModel& m) {
  m.chart = Chart::QPXZ;
  m.metric.chart = Chart::QPXZ;
  m.y_of = [](const JetPoint& pt, int order) { return -lift(pt, 2, order) * lift(pt, 3, order); };
}

void qpxy_common(FamilyModel& m) {
  m.chart = Chart::QPXY;
  m.metric.chart = Chart::QPXY;
  m.y_of = [](const JetPoint& pt, int order) { return lift(pt, 3, order); };
}

// (q,p,x,z) metric from (E, D_z) expressions in (q, z); used for ed-generic and the nonexistence row.
void install_ed(FamilyModel& m, const EDFamilySpec& es) {
  qpxz_common(m);
  m.metric = ed_metric(es);
  m.ed = [es](const JetPoint& pt, int order) { return ed_jets(es, pt.coords[0], pt.coords[3], order); };
  m.admit = [es](const JetPoint& pt) {
    admit_guarded(pt, [&] { ed_jets(es, pt.coords[0], pt.coords[3], 0); });
  };
}

}  // namespace

FamilyModel build_family(const FamilySpec& s) {
  FamilyModel m;
  m.spec = s;
  m.info = &family_info(s.id);
  m.mu0 = s.mu0;
  m.generators.push_back(killing("K1", {0.0}, {1.0}));
  m.expected_algebra = "A1";
  m.conditions = [](const JetPoint&) { return std::vector<OpenCondition>{}; };
  m.identities = [](const JetPoint&) { return std::vector<std::pair<std::string, Residual>>{}; };
  const std::string& id = s.id;
  cplx mu0 = s.mu0;

  if (id == "generic-W") {
    m.lambda = s.constant("lambda");
    KeyFunctionSpec k = KeyFunctionSpec::from_text(s.text.at("W"), m.lambda, mu0);
    m.key = k;
    qpxy_common(m);
    m.metric = key_function_metric(k);
    m.admit = [k](const JetPoint& pt) {
      admit_guarded(pt, [&] { abqs_from_W(k, pt, 0); });
    };
    m.expected_algebra = "";
    return m;
  }

  if (id == "ed-generic") {
    m.lambda = s.constant("lambda");
    EDFamilySpec es;
    es.E = s.function("E");
    es.Dz = s.function("Dz");
    es.g = Expr::parse("0", {"q"});
    es.lambda = m.lambda;
    es.mu0 = mu0;
    install_ed(m, es);
    m.expected_algebra = "";
    return m;
  }

  if (id == "typeN-ppmm") {
    m.lambda = 0;
    cplx b0 = s.constant("b0"), c0 = s.constant("c0"), d0 = s.constant("d0");
    Expr raw = Expr::parse("b0*z^2 + c0*z + d0", {"q", "z", "b0", "c0", "d0"});
    qpxz_common(m);
    auto Ej = [raw, b0, c0, d0](const Jet& q, const Jet& z) {
      return raw.eval(std::vector<Jet>{q, z, cst(b0, q), cst(c0, q), cst(d0, q)});
    };
    m.metric.tetrad = [Ej, mu0](const JetPoint& pt, int order) {
      auto c = coordinate_jets(pt, order + 2);
      Jet E2 = Ej(c[0], c[3]);
      Jet x = c[2].truncated(order), z = c[3].truncated(order), zero = cst(0.0, x);
      auto f = abq_from_ed(x, z, E2.truncated(order), E2.d(3).d(3), zero, zero, 0.0, mu0);
      return walker_tetrad(x, z, cst(1.0, x), f[0], -2.0 * f[1], f[2]);
    };
    m.ed = [Ej](const JetPoint& pt, int order) {
      Jet q = Jet::variable(pt.coords[0], 0, 2, order), z = Jet::variable(pt.coords[3], 1, 2, order);
      return EDJets{Ej(q, z), cst(0.0, q), pt.coords[0], pt.coords[3]};
    };
    m.admit = [](const JetPoint& pt) { admit_guarded(pt, [] {}); };
    return m;
  }

  if (id == "typeD-pppp" || id == "typeD-ppmm") {
    m.lambda = s.constant("lambda");
    cplx L = m.lambda;
    require(std::abs(L) > 1e-8, "Lambda != 0", "type D families need a nonzero cosmological constant");
    qpxy_common(m);
    m.type_d_optics = true;
    if (id == "typeD-pppp") {
      cplx c0 = s.constant("c0"), d0 = s.constant("d0");
      m.metric = hh_metric([L, c0, d0, mu0](const std::array<Jet, 4>& c) {
        const Jet &x = c[2], &y = c[3];
        Jet x2 = x * x, y2 = y * y, y3 = y2 * y;
        Jet A = 9.0 / L * y2 - 3.0 * y + 0.5 * mu0 * x2 * x + 3.0 * c0 / L * x2 + L / 3.0;
        Jet Q = 6.0 / L * y3 / x - 3.0 * y2 / x + (0.5 * mu0 * x2 + L / (3.0 * x)) * y + 3.0 * d0 / L * x2;
        Jet B = 3.0 / L * y3 * y / x2 - 2.0 * y3 / x2 + (0.5 * mu0 * x + L / (3.0 * x2) - 3.0 * c0 / L) * y2 +
                (6.0 * d0 / L * x + c0) * y - d0 * x;
        return std::array<Jet, 3>{A, Q, B};
      });
      m.ed = [L, c0, d0](const JetPoint& pt, int order) {
        Jet x = pt.coords[2] * Jet::constant(1.0, 2, order);
        Jet q = Jet::variable(pt.coords[0], 0, 2, order);
        cplx zv = -pt.coords[3] / pt.coords[2];
        Jet z = Jet::variable(zv, 1, 2, order);
        Jet E = z * z * z + c0 * z + d0;
        return EDJets{E, 3.0 / L * E, pt.coords[0], zv};
      };
      m.generators.push_back(killing("K2", {1.0}, {0.0}));
      m.expected_algebra = "2A1";
    } else {
      cplx b0 = s.constant("b0");
      m.metric = hh_metric([L, b0, mu0](const std::array<Jet, 4>& c) {
        const Jet &x = c[2], &y = c[3];
        Jet p0 = 0.5 * mu0 * x * x * x + L / 3.0;
        Jet A = p0 + b0 * x;
        return std::array<Jet, 3>{A, A * y / x, p0 * y * y / (x * x)};
      });
      m.ed = [b0](const JetPoint& pt, int order) {
        cplx zv = -pt.coords[3] / pt.coords[2];
        Jet z = Jet::variable(zv, 1, 2, order);
        return EDJets{b0 * z * z, cst(0.0, z), pt.coords[0], zv};
      };
      m.generators.push_back(killing("K2", {1.0}, {0.0}));
      m.generators.push_back(SymmetryVector{"K3", 0.0, poly_fn({0.0, 1.0}), const_fn(0.0), const_fn(0.0), const_fn(0.0)});
      m.generators.push_back(
          SymmetryVector{"K4", 0.0, poly_fn({0.0, 0.0, -b0}), poly_fn({0.0, 1.0}), const_fn(0.0), const_fn(0.0)});
      m.expected_algebra = std::abs(b0) > 1e-12 ? "A3,8+A1" : "A4,8";
    }
    m.admit = [](const JetPoint& pt) { admit_guarded(pt, [] {}); };
    m.conditions = [L](const JetPoint&) { return std::vector<OpenCondition>{{"Lambda", std::abs(L)}}; };
    return m;
  }

  if (id == "typeN-pppp" || id == "typeN-2d" || id == "typeN-3d") {
    m.lambda = 0;
    qpxz_common(m);
    // D_z as a function of (q, z) jets, and its z-derivative.
    std::function<Jet(const Jet&, const Jet&)> Dz;
    std::function<void(const Jet&, const Jet&)> touch;
    cplx b0 = 0;
    if (id == "typeN-pppp") {
      b0 = s.constant("b0");
      Expr H = s.function("H");
      Dz = [H, b0](const Jet& q, const Jet& z) {
        Jet t = 1.0 / den("z", z) - b0 * q;
        return z * z * call(H, t);
      };
      m.conditions = [H, b0](const JetPoint& pt) {
        cplx t = 1.0 / pt.coords[3] - b0 * pt.coords[0];
        return std::vector<OpenCondition>{{"H_ttt", std::abs(H.eval_jet(t, 3).partial({3, 0, 0, 0}))}};
      };
      // Metric coefficients as printed: A = mu0 x^3/2 + b0 x + (2zH - H_t) x^2, etc.
      m.metric.tetrad = [H, b0, mu0](const JetPoint& pt, int order) {
        auto c = coordinate_jets(pt, order);
        const Jet &x = c[2], &z = c[3];
        Jet t = 1.0 / z - b0 * c[0];
        Jet h = call(H, t), ht = derived(H, t, 1);
        Jet x2 = x * x, p0 = 0.5 * mu0 * x2 * x;
        Jet A = p0 + b0 * x + (2.0 * z * h - ht) * x2;
        Jet cpq = 2.0 * (p0 * z + b0 * x * z + (z * z * h - z * ht) * x2);
        Jet B = p0 * z * z - x2 * z * z * ht;
        return walker_tetrad(x, z, cst(1.0, x), A, cpq, B);
      };
      m.expected_algebra = "A1";
    } else {
      Expr H;
      if (id == "typeN-2d") {
        H = s.function("H");
        m.generators.push_back(killing("K2", {1.0}, {0.0}));
        m.expected_algebra = "2A1";
      } else {
        cplx a0 = s.constant("alpha0"), g0 = s.constant("gamma0"), h0 = s.constant("H0");
        require(std::abs(h0) > 1e-12, "H0 != 0", "H0 must be nonzero");
        require(std::abs(a0 - 0.5) > 1e-12 && std::abs(a0 - 1.5) > 1e-12, "alpha0 not in {1/2, 3/2}",
                "these values give H_zzz = 0");
        std::ostringstream os;
        os.precision(17);
        auto lit = [&](cplx v) {
          std::ostringstream o;
          o.precision(17);
          o << "(" << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "i)";
          return o.str();
        };
        if (std::abs(a0 - 1.0) < 1e-12) {
          require(std::abs(g0) > 1e-12, "gamma0 != 0", "alpha0 = 1 needs gamma0 != 0");
          os << lit(h0) << "*exp(z/(2*" << lit(g0) << "))";
          m.expected_algebra = "A3,2";
        } else {
          os << lit(h0) << "*(z + " << lit(g0 / (a0 - 1.0)) << ")^" << lit((2.0 * a0 - 1.0) / (2.0 * a0 - 2.0));
          if (std::abs(a0 + 1.0) < 1e-12)
            m.expected_algebra = "A3,4";
          else if (std::abs(a0) < 1e-12)
            m.expected_algebra = "A2,1+A1";
          else
            m.expected_algebra = a35_name(a0);
        }
        H = Expr::parse(os.str(), {"z"});
        m.spec.text["H"] = os.str();
        m.generators.push_back(killing("K2", {1.0}, {0.0}));
        m.generators.push_back(
            SymmetryVector{"K3", 0.75, poly_fn({0.0, a0}), poly_fn({0.0, g0}), const_fn(0.0), const_fn(0.0)});
      }
      Dz = [H](const Jet&, const Jet& z) { return call(H, z); };
      m.conditions = [H](const JetPoint& pt) {
        return std::vector<OpenCondition>{{"H_zzz", std::abs(H.eval_jet(pt.coords[3], 3).partial({3, 0, 0, 0}))}};
      };
      // Metric coefficients with the dp^2 term x^2 H_z (= x^2 D_zz).
      m.metric.tetrad = [H, mu0](const JetPoint& pt, int order) {
        auto c = coordinate_jets(pt, order);
        const Jet &x = c[2], &z = c[3];
        Jet h = call(H, z), hz = derived(H, z, 1);
        Jet x2 = x * x, p0 = 0.5 * mu0 * x2 * x;
        Jet A = p0 + hz * x2;
        Jet cpq = 2.0 * (p0 * z - (h - z * hz) * x2);
        Jet B = p0 * z * z + x2 * (z * z * hz - 2.0 * z * h);
        return walker_tetrad(x, z, cst(1.0, x), A, cpq, B);
      };
    }
    m.ed = [Dz, b0](const JetPoint& pt, int order) {
      Jet q = Jet::variable(pt.coords[0], 0, 2, order), z = Jet::variable(pt.coords[3], 1, 2, order);
      return EDJets{b0 * z * z, Dz(q, z), pt.coords[0], pt.coords[3]};
    };
    m.admit = [Dz](const JetPoint& pt) {
      admit_guarded(pt, [&] {
        Dz(Jet::constant(pt.coords[0], 1, 0), den("z", Jet::constant(pt.coords[3], 1, 0)));
      });
    };
    return m;
  }

  // Profile families in (q,p,x,w).
  auto ww = std::make_shared<WalkerW>();
  ww->mu0 = mu0;
  ww->w0 = s.constant("w0");
  if (id == "typeII-pppp") {
    cplx L = s.constant("lambda");
    require(std::abs(L) > 1e-8, "Lambda != 0", "type II families need a nonzero cosmological constant");
    Expr Qe = s.function("Q"), He = s.function("H");
    m.lambda = L;
    ww->lambda = L;
    auto Mw = [Qe, He, L](const Jet& q, const Jet& w) {
      Jet d = den("Q-H", call(Qe, q) - call(He, w));
      return sqrt(6.0 * L * derived(He, w, 1) / d);
    };
    ww->integrand = [Qe, He, L, Mw](const Jet& q, const Jet& w) {
      Jet d = den("Q-H", call(Qe, q) - call(He, w));
      return derived(Qe, q, 1) / (4.0 * L) * Mw(q, w) / d;
    };
    ww->ezz = Mw;
    auto abel = [He, L, Mw](cplx q, cplx w) {
      Jet qj = Jet::variable(q, 0, 2, 3), wj = Jet::variable(w, 1, 2, 3);
      Jet mw = Mw(qj, wj);
      Jet hw = derived(He, wj, 1), hww = derived(He, wj, 2);
      Jet a = 6.0 * L * hww / hw;
      return std::array<Jet, 2>{mw, a};
    };
    m.identities = [abel, L](const JetPoint& pt) {
      auto j = abel(pt.coords[0], pt.coords[3]);
      cplx mw = j[0].value(), mww = j[0].partial({0, 1, 0, 0}), a = j[1].value();
      std::array<cplx, 3> t = {12.0 * L * mww, -mw * mw * mw, -a * mw};
      Residual r;
      for (auto v : t) {
        r.value += v;
        r.scale = std::max(r.scale, std::abs(v));
      }
      return std::vector<std::pair<std::string, Residual>>{{"abel", r}};
    };
    m.conditions = [abel, L](const JetPoint& pt) {
      auto j = abel(pt.coords[0], pt.coords[3]);
      cplx mw = j[0].value(), mqw = j[0].partial({1, 0, 0, 0});
      cplx a = j[1].value(), aw = j[1].partial({0, 1, 0, 0}), aww = j[1].partial({0, 2, 0, 0});
      cplx c1 = aw * mw, c2 = 12.0 * L * aww - a * aw + 3.0 * aw * mw * mw;
      return std::vector<OpenCondition>{{"M_qw", std::abs(mqw), true},
                                        {"a_w M_w + b_w | 12 Lambda a_ww - a a_w + 3 a_w M_w^2 + 6 b_w M_w",
                                         std::max(std::abs(c1), std::abs(c2)), false}};
    };
  } else if (id == "typeII-ppmm" || id == "typeIII-ppmm") {
    cplx L = id == "typeII-ppmm" ? s.constant("lambda") : cplx(0.0);
    if (id == "typeII-ppmm")
      require(std::abs(L) > 1e-8, "Lambda != 0", "type II families need a nonzero cosmological constant");
    Expr Fe = s.function("F");
    m.lambda = L;
    ww->lambda = L;
    ww->with_d = false;
    ww->integrand = [Fe](const Jet& q, const Jet& w) {
      Jet t = den("q+F", q + call(Fe, w));
      return -2.0 * derived(Fe, w, 1) / (den("w", w) * t * t);
    };
    ww->ezz = [](const Jet&, const Jet& w) { return w; };
    m.conditions = [Fe](const JetPoint& pt) {
      return std::vector<OpenCondition>{{"F_w", std::abs(Fe.eval_jet(pt.coords[3], 1).partial({1, 0, 0, 0}))}};
    };
  } else if (id == "typeIII-pppp") {
    Expr Se = s.function("S"), Fe = s.function("F");
    m.lambda = 0;
    ww->integrand = [Se, Fe](const Jet& q, const Jet& w) {
      Jet t = den("q+F", q + call(Fe, w));
      return -2.0 * derived(Fe, w, 1) / (den("S", call(Se, w)) * t * t);
    };
    ww->ezz = [Se](const Jet&, const Jet& w) { return call(Se, w); };
    m.conditions = [Se, Fe](const JetPoint& pt) {
      return std::vector<OpenCondition>{{"S_w", std::abs(Se.eval_jet(pt.coords[3], 1).partial({1, 0, 0, 0}))},
                                        {"F_w", std::abs(Fe.eval_jet(pt.coords[3], 1).partial({1, 0, 0, 0}))}};
    };
  } else if (id == "typeIII-pppp-sym" || id == "typeIII-ppmm-sym") {
    cplx chi0 = s.constant("chi0");
    require(std::abs(chi0) > 1e-12, "chi0 != 0", "the homothety constant must be nonzero");
    m.lambda = 0;
    cplx c = 3.0 / (2.0 * chi0);
    std::function<cplx(cplx)> phi;
    if (id == "typeIII-pppp-sym") {
      cplx z0 = s.constant("Z0");
      require(std::abs(z0) > 1e-12, "Z0 != 0", "Z0 must be nonzero");
      cplx s0 = 3.0 / (chi0 * z0);
      ww->integrand = [z0, c](const Jet& q, const Jet& w) {
        Jet u = den("q - 3 ln(w)/(2 chi0)", q - c * log(w));
        return z0 * w / (u * u);
      };
      ww->ezz = [s0](const Jet&, const Jet& w) { return s0 / (w * w); };
      phi = [chi0](cplx w) { return -2.0 / 3.0 * chi0 * w; };
    } else {
      ww->with_d = false;
      ww->integrand = [c](const Jet& q, const Jet& w) {
        Jet u = den("q + 3 ln(w)/(4 chi0)", q + 0.5 * c * log(w));
        return -c / (u * u * w * w);
      };
      ww->ezz = [](const Jet&, const Jet& w) { return w; };
      phi = [chi0](cplx w) { return 4.0 / 3.0 * chi0 * w; };
    }
    // Homothety with the p-translation compensating the finite base point.
    cplx w0 = ww->w0, ph = phi(w0);
    auto f = ww->integrand;
    auto beta = [f, w0, ph](const Jet& q) { return ph * f(q, cst(w0, q)); };
    m.generators.push_back(SymmetryVector{"K2", chi0, const_fn(1.0), antiderivative(beta), const_fn(0.0), const_fn(0.0)});
    m.expected_algebra = "A2,1";
    m.conditions = [chi0](const JetPoint&) { return std::vector<OpenCondition>{{"chi0", std::abs(chi0)}}; };
  } else {
    throw InvalidArgument("no model for family " + id);
  }
  if (id == "typeII-ppmm" || id == "typeIII-ppmm" || id == "typeIII-ppmm-sym") {
    // H = w Z_w solves the Liouville equation H = -d_w(H_q/H).
    auto wwc = ww;
    m.identities = [wwc](const JetPoint& pt) {
      Jet z = wwc->Z(pt.coords[0], pt.coords[3], 4);
      Jet w = Jet::variable(pt.coords[3], 1, 2, 3);
      Jet H = w * z.d(1);
      Jet ratio = H.d(0) / H.truncated(2);
      cplx lhs = H.value(), rhs = -ratio.partial({0, 1, 0, 0});
      return std::vector<std::pair<std::string, Residual>>{
          {"liouville", Residual{lhs - rhs, std::max(std::abs(lhs), std::abs(rhs))}}};
    };
  }
  m.w0 = ww->w0;
  install_walker(m, ww);
  return m;
}

MetricField build_metric(const FamilySpec& s) { return build_family(s).metric; }

}  // namespace phever

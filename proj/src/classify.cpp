#include "phever/classify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace phever {

namespace {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

using Poly = std::array<cplx, 5>;  // p[i] multiplies t^i

std::string type_of(std::vector<int> part) {
  std::sort(part.rbegin(), part.rend());
  if (part == std::vector<int>{1, 1, 1, 1}) return "I";
  if (part == std::vector<int>{2, 1, 1}) return "II";
  if (part == std::vector<int>{2, 2}) return "D";
  if (part == std::vector<int>{3, 1}) return "III";
  if (part == std::vector<int>{4}) return "N";
  return "?";
}

std::vector<int> partition_of(const std::string& type) {
  if (type == "I") return {1, 1, 1, 1};
  if (type == "II") return {2, 1, 1};
  if (type == "D") return {2, 2};
  if (type == "III") return {3, 1};
  if (type == "N") return {4};
  return {};
}

// Coefficients of the binary quartic after (zeta, eta) = U (t, 1).
Poly rotated(const std::array<cplx, 5>& a, double th, double ph) {
  cplx u00 = std::cos(th), u01 = -std::sin(th) * std::polar(1.0, ph);
  cplx u10 = std::sin(th) * std::polar(1.0, -ph), u11 = std::cos(th);
  Poly p{};
  for (int k = 0; k <= 4; ++k) {
    std::array<cplx, 5> term{};
    term[0] = a[k];
    int deg = 0;
    auto mul = [&](cplx c1, cplx c0) {  // multiply by c1 t + c0
      for (int i = deg + 1; i >= 0; --i) term[i] = (i > 0 ? c1 * term[i - 1] : 0.0) + c0 * term[i];
      ++deg;
    };
    for (int i = 0; i < k; ++i) mul(u00, u01);
    for (int i = k; i < 4; ++i) mul(u10, u11);
    for (int i = 0; i <= 4; ++i) p[i] += term[i];
  }
  return p;
}

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// max over j < k of |p^(j)(r)/j!| / sum_i |p_i| C(i,j) |r|^(i-j)
double cluster_score(const Poly& p, cplx r, int k) {
  double worst = 0;
  for (int j = 0; j < k; ++j) {
    cplx v = 0;
    double s = 0;
    for (int i = j; i <= 4; ++i) {
      v += p[i] * binom(i, j) * std::pow(r, i - j);
      s += std::abs(p[i]) * binom(i, j) * std::pow(std::abs(r), i - j);
    }
    worst = std::max(worst, s > 0 ? std::abs(v) / s : 0.0);
  }
  return worst;
}

// All set partitions of {0,..,n-1} as block labels.
void set_partitions(int n, std::vector<int>& cur, int used, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  for (int b = 0; b <= used; ++b) {
    cur.push_back(b);
    set_partitions(n, cur, std::max(used, b + 1), out);
    cur.pop_back();
  }
}

const std::vector<std::vector<int>>& partitions4() {
  static const std::vector<std::vector<int>> all = [] {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    set_partitions(4, cur, 0, out);
    return out;
  }();
  return all;
}

PetrovType classify_roots(const Poly& p, const std::vector<cplx>& roots, double tol) {
  PetrovType best;
  int best_blocks = 5;
  double best_score = 0;
  for (const auto& lab : partitions4()) {
    int nb = *std::max_element(lab.begin(), lab.end()) + 1;
    double score = 0;
    std::vector<int> sizes(nb, 0);
    std::vector<cplx> means(nb, 0.0);
    for (int i = 0; i < 4; ++i) {
      sizes[lab[i]]++;
      means[lab[i]] += roots[i];
    }
    for (int b = 0; b < nb; ++b) {
      means[b] /= static_cast<double>(sizes[b]);
      score = std::max(score, cluster_score(p, means[b], sizes[b]));
    }
    if (score > tol) continue;
    if (nb < best_blocks || (nb == best_blocks && score < best_score)) {
      best_blocks = nb;
      best_score = score;
      best.partition = sizes;
      best.roots = means;
      best.radii.assign(nb, 0.0);
      for (int i = 0; i < 4; ++i) best.radii[lab[i]] = std::max(best.radii[lab[i]], std::abs(roots[i] - means[lab[i]]));
    }
  }
  if (best.partition.empty()) {
    best.partition = {1, 1, 1, 1};
    best.roots = roots;
    best.radii.assign(4, 0.0);
  }
  std::vector<std::size_t> order(best.partition.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return best.partition[a] > best.partition[b]; });
  PetrovType r;
  for (auto i : order) {
    r.partition.push_back(best.partition[i]);
    r.roots.push_back(best.roots[i]);
    r.radii.push_back(best.radii[i]);
  }
  r.type = type_of(r.partition);
  return r;
}

}  // namespace

PetrovType petrov_from_coefficients(const std::array<cplx, 5>& c, double tol) {
  if (!(tol > 0)) throw InvalidArgument("classification tolerance must be positive");
  double cmax = 0;
  for (auto v : c) cmax = std::max(cmax, std::abs(v));
  if (cmax <= tol) return {"O", {}, {}, {}};
  std::array<cplx, 5> a = {c[4], 4.0 * c[3], 6.0 * c[2], 4.0 * c[1], c[0]};  // a[k]: zeta^k eta^(4-k)
  static const std::array<std::pair<double, double>, 4> angles = {
      std::pair{0.61, 0.37}, std::pair{1.13, 2.1}, std::pair{0.29, -1.4}, std::pair{0.97, 0.83}};
  Poly p{};
  for (auto [th, ph] : angles) {
    p = rotated(a, th, ph);
    double pm = 0;
    for (auto v : p) pm = std::max(pm, std::abs(v));
    if (std::abs(p[4]) >= 1e-2 * pm) break;
  }
  double pm = 0;
  for (auto v : p) pm = std::max(pm, std::abs(v));
  for (auto& v : p) v /= pm;
  Eigen::Matrix4cd comp = Eigen::Matrix4cd::Zero();
  for (int i = 1; i < 4; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < 4; ++i) comp(i, 3) = -p[i] / p[4];
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(comp, false);
  std::vector<cplx> roots(4);
  for (int i = 0; i < 4; ++i) roots[i] = es.eigenvalues()(i);

  PetrovType lo = classify_roots(p, roots, tol / 2), hi = classify_roots(p, roots, 2 * tol);
  if (lo.type != hi.type) throw AmbiguousClassification(lo.type, hi.type);
  return classify_roots(p, roots, tol);
}

PetrovType table1_type(const EDJets& ed, cplx lambda, double tol) {
  cplx e3 = ed.E.partial({0, 3, 0, 0}), e4 = ed.E.partial({0, 4, 0, 0}), d4 = ed.Dz.partial({0, 3, 0, 0});
  auto nz = [tol](cplx v, double scale) { return std::abs(v) > tol * std::max(1.0, scale); };
  std::string t;
  if (nz(lambda, 0)) {
    cplx lhs = 2.0 * lambda * d4, rhs = e3 * e3;
    t = (nz(e4, 0) || nz(lhs - rhs, std::max(std::abs(lhs), std::abs(rhs)))) ? "II" : "D";
  } else if (nz(e3, 0)) {
    t = "III";
  } else if (nz(d4, 0)) {
    t = "N";
  } else {
    t = "O";
  }
  return {t, partition_of(t), {}, {}};
}

namespace {

Residual sum_terms(std::initializer_list<cplx> ts) {
  Residual r;
  for (auto t : ts) {
    r.value += t;
    r.scale = std::max(r.scale, std::abs(t));
  }
  return r;
}

cplx dv(const Jet& f, int v) {
  MultiIndex a{0, 0, 0, 0};
  a[v] = 1;
  return f.partial(a);
}

}  // namespace

std::array<Residual, 4> nullstring_residuals(const std::array<Jet, 3>& abq, const JetPoint& qpxy) {
  auto c = coordinate_jets(qpxy, 1);
  Jet z = -c[3] / c[2];
  const Jet &A = abq[0], &Q = abq[1], &B = abq[2];
  Jet Zc = B.truncated(1) + 2.0 * z * Q.truncated(1) + z * z * A.truncated(1);
  Jet G = Q.truncated(1) + z * A.truncated(1);
  cplx x = qpxy.coords[2], zv = z.value();
  cplx zq = dv(z, 0), zp = dv(z, 1), zx = dv(z, 2), zy = dv(z, 3);
  return {sum_terms({zx, -zv * zy}),
          sum_terms({zq, -zv * zp, -zy * Zc.value(), zv * dv(Zc, 3), -dv(Zc, 2)}),
          sum_terms({-x * zy, -1.0}),
          sum_terms({-x * zp, x * zv * dv(G, 3), -x * dv(G, 2), (1.0 - x * zy) * G.value()})};
}

std::string CongruenceReport::symbol() const {
  std::string s = "[";
  for (std::size_t i = 0; i < labels.size(); ++i) s += (i ? "," : "") + labels[i];
  return s + "]";
}

CongruenceReport congruence_optics(const FamilyModel& m, const JetPoint& pt, double tol) {
  if (!m.ed) throw InvalidArgument("optics need a family with a nonexpanding congruence (E, D form)");
  auto label = [tol](cplx th, cplx rho) {
    return std::string(1, std::abs(th) > tol ? '+' : '-') + (std::abs(rho) > tol ? '+' : '-');
  };
  JetPoint q = to_qpxy(m, pt);
  cplx x = q.coords[2], y = q.coords[3];
  EDJets ed = m.ed(pt, 3);
  CongruenceReport r;
  cplx zy = -1.0 / x;
  r.theta1 = x * zy + 2.0;
  r.rho1 = zy;
  r.theta3 = r.rho3 = ed.Dz.value();
  if (m.type_d_optics) {
    cplx a = ed.E.partial({0, 3, 0, 0}) / 6.0;
    auto abq = ed_abq(ed, q, m.lambda, m.mu0, 0);
    r.theta2 = a;
    r.theta4 = std::sqrt(2.0) * x * ((1.0 - 3.0 * a * y / m.lambda) * abq[0].value() + 3.0 * a * x / m.lambda * abq[1].value());
    r.labels = {label(r.theta1, r.rho1), label(r.theta2, r.theta2), label(r.theta3, r.rho3), label(r.theta4, r.theta4)};
  } else {
    r.labels = {label(r.theta1, r.rho1), label(r.theta3, r.rho3)};
  }
  return r;
}

Residual killing_residual(const FamilyModel& m, const SymmetryVector& k, const JetPoint& pt) {
  JetMat4 g = metric_jets(m.metric, pt, 1);
  auto K = vector_field(m, k, pt, 1);
  Residual worst;
  double scale = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      cplx lie = 0;
      for (int c = 0; c < 4; ++c) {
        cplx t1 = K[c].value() * dv(g[a][b], c);
        cplx t2 = g[c][b].value() * dv(K[c], a);
        cplx t3 = g[a][c].value() * dv(K[c], b);
        lie += t1 + t2 + t3;
        scale = std::max({scale, std::abs(t1), std::abs(t2), std::abs(t3)});
      }
      cplx h = k.chi0 * g[a][b].value();
      scale = std::max(scale, 2.0 * std::abs(h));
      cplx v = 0.5 * lie - h;
      if (std::abs(v) >= std::abs(worst.value)) worst.value = v;
    }
  worst.scale = 0.5 * scale;
  return worst;
}

std::array<Residual, 5> master_residual(const EDJets& ed, const SymmetryVector& k, cplx lambda, cplx mu0) {
  Jet qj = Jet::variable(ed.q, 0, 1, 3);
  Jet a = k.a(qj), c = k.c(qj), eps = k.eps(qj), alpha = k.alpha(qj);
  auto D = [](const Jet& f, int n) { return f.partial({n, 0, 0, 0}); };
  cplx a0 = D(a, 0), aq = D(a, 1), aqq = D(a, 2), aqqq = D(a, 3);
  cplx cq = D(c, 1), cqq = D(c, 2), e0 = D(eps, 0), eq = D(eps, 1);
  cplx z = ed.z, chi = k.chi0;
  auto E = [&](int q, int zz) { return ed.E.partial({q, zz, 0, 0}); };
  auto Dz = [&](int q, int zz) { return ed.Dz.partial({q, zz, 0, 0}); };
  return {sum_terms({-a0 * Dz(1, 0), (aq * z - 4.0 / 3.0 * chi * z + cq) * Dz(0, 1), (2.0 / 3.0 * chi - aq) * Dz(0, 0),
                     0.5 * mu0 * e0}),
          sum_terms({-0.5 * a0 * E(1, 0), (-2.0 / 3.0 * chi * z + 0.5 * aq * z + 0.5 * cq) * E(0, 1),
                     (2.0 / 3.0 * chi - aq) * E(0, 0), -e0 * Dz(0, 0), 0.5 * (aqq * z + cqq)}),
          sum_terms({e0 * E(0, 1), eq}), sum_terms({lambda * e0}), sum_terms({aqqq, -2.0 * lambda * D(alpha, 0)})};
}

double second_symmetry_obstruction(const EDJets& ed) {
  if (ed.E.order() < 4 || ed.Dz.order() < 3) throw InvalidArgument("obstruction needs (E, D_z) jets of order 4");
  // z-derivatives of E_q = c1 E_z + c2 and D_zq = c1 D_zz at the point: one unknown c1.
  CMat A(6, 1);
  CVec b(6);
  for (int k = 1; k <= 3; ++k) {
    A(k - 1, 0) = ed.E.partial({0, k + 1, 0, 0});
    b(k - 1) = ed.E.partial({1, k, 0, 0});
  }
  for (int k = 0; k <= 2; ++k) {
    A(3 + k, 0) = ed.Dz.partial({0, k + 1, 0, 0});
    b(3 + k) = ed.Dz.partial({1, k, 0, 0});
  }
  double bn = b.norm();
  if (bn < 1e-12) return 0.0;
  CVec x = A.completeOrthogonalDecomposition().solve(b);
  return (A * x - b).norm() / bn;
}

std::array<cplx, 4> bracket(const std::array<Jet, 4>& X, const std::array<Jet, 4>& Y) {
  std::array<cplx, 4> r{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r[a] += X[b].value() * dv(Y[a], b) - Y[b].value() * dv(X[a], b);
  return r;
}

AlgebraReport algebra_identify(const FamilyModel& m, const std::vector<SymmetryVector>& gens,
                               const std::vector<JetPoint>& pts, double fit_tol) {
  const int n = static_cast<int>(gens.size());
  const int P = static_cast<int>(pts.size());
  if (n == 0 || P == 0) throw InvalidArgument("algebra_identify needs generators and points");
  std::vector<std::vector<std::array<Jet, 4>>> K(P);
  for (int p = 0; p < P; ++p)
    for (const auto& g : gens) K[p].push_back(vector_field(m, g, pts[p], 1));
  CMat A(4 * P, n);
  for (int p = 0; p < P; ++p)
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < 4; ++a) A(4 * p + a, k) = K[p][k][a].value();
  auto solver = A.completeOrthogonalDecomposition();
  AlgebraReport rep;
  rep.structure.assign(n, std::vector<std::vector<cplx>>(n, std::vector<cplx>(n, 0.0)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      CVec b(4 * P);
      for (int p = 0; p < P; ++p) {
        auto br = bracket(K[p][i], K[p][j]);
        for (int a = 0; a < 4; ++a) b(4 * p + a) = br[a];
      }
      CVec c = solver.solve(b);
      double res = (A * c - b).norm() / std::max(1.0, b.norm());
      rep.fit_residual = std::max(rep.fit_residual, res);
      for (int k = 0; k < n; ++k) {
        rep.structure[i][j][k] = c(k);
        rep.structure[j][i][k] = -c(k);
      }
    }
  if (rep.fit_residual > fit_tol) throw NotAnAlgebra(rep.fit_residual);
  rep.name = algebra_name(rep.structure);
  return rep;
}

namespace {

using Structure = std::vector<std::vector<std::vector<cplx>>>;

struct Lie {
  const Structure& c;
  int n;
  CVec br(const CVec& u, const CVec& v) const {
    CVec r = CVec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        cplx f = u(i) * v(j);
        if (f == cplx(0.0)) continue;
        for (int k = 0; k < n; ++k) r(k) += f * c[i][j][k];
      }
    return r;
  }
};

// Orthonormal basis of the column span and of its orthogonal complement.
std::pair<CMat, CMat> span_split(const CMat& cols, int n, double tol) {
  if (cols.cols() == 0) return {CMat(n, 0), CMat::Identity(n, n)};
  Eigen::JacobiSVD<CMat> svd(cols, Eigen::ComputeFullU);
  double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol * std::max(1.0, smax)) ++r;
  return {svd.matrixU().leftCols(r), svd.matrixU().rightCols(n - r)};
}

CMat derived_cols(const Lie& L, const CMat& basis) {
  int m = static_cast<int>(basis.cols());
  CMat out(L.n, m * (m - 1) / 2);
  int k = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) out.col(k++) = L.br(basis.col(i), basis.col(j));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << (std::abs(v) < 5e-13 ? 0.0 : v);
  return os.str();
}

std::string param(const std::string& base, const std::string& key, cplx v) {
  std::string s = base + "(" + key + "=" + fmt(v.real());
  if (std::abs(v.imag()) > 1e-9) s += (v.imag() > 0 ? "+" : "-") + fmt(std::abs(v.imag())) + "i";
  return s + ")";
}

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(a) + std::abs(b)); }

std::string name_of(const Structure& c, double tol);

// Quotient of the algebra by the span of a central vector z.
Structure quotient(const Lie& L, const CVec& z) {
  CMat zc(L.n, 1);
  zc.col(0) = z.normalized();
  CMat comp = span_split(zc, L.n, 1e-12).second;
  int m = L.n - 1;
  Structure q(m, std::vector<std::vector<cplx>>(m, std::vector<cplx>(m, 0.0)));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      CVec b = L.br(comp.col(i), comp.col(j));
      CVec coords = comp.adjoint() * b;
      for (int k = 0; k < m; ++k) q[i][j][k] = coords(k);
    }
  return q;
}

std::string name_of(const Structure& c, double tol) {
  const int n = static_cast<int>(c.size());
  Lie L{c, n};
  CMat I = CMat::Identity(n, n);
  auto [D, Dperp] = span_split(derived_cols(L, I), n, tol);
  const int r = static_cast<int>(D.cols());
  if (n == 1) return "A1";
  if (r == 0) return std::to_string(n) + "A1";
  if (n == 2) return "A2,1";

  // Center
  CMat ad(n * n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) ad(j * n + k, i) = c[i][j][k];
  Eigen::JacobiSVD<CMat> svd(ad, Eigen::ComputeFullV);
  double smax = svd.singularValues()(0);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol * std::max(1.0, smax)) ++rank;
  CMat center = svd.matrixV().rightCols(n - rank);
  // A central direction outside the derived algebra splits off an A1.
  for (int i = 0; i < center.cols(); ++i) {
    CVec z = center.col(i);
    if (r < n && (Dperp.adjoint() * z).norm() > 1e-6 * z.norm()) {
      std::string rest = name_of(quotient(L, z), tol);
      return rest == std::to_string(n - 1) + "A1" ? std::to_string(n) + "A1" : rest + "+A1";
    }
  }

  if (n == 3) {
    if (r == 1) return "A3,1";
    if (r == 3) return "A3,8";
    CVec e = Dperp.col(0);
    Eigen::Matrix2cd M;
    for (int m = 0; m < 2; ++m) {
      CVec v = D.adjoint() * L.br(e, D.col(m));
      M(0, m) = v(0);
      M(1, m) = v(1);
    }
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(M);
    cplx l1 = es.eigenvalues()(0), l2 = es.eigenvalues()(1);
    if (close(l1, l2, 1e-6)) {
      cplx l = 0.5 * (l1 + l2);
      return (M - l * Eigen::Matrix2cd::Identity()).norm() <= 1e-6 * std::max(1.0, std::abs(l)) ? "A3,3" : "A3,2";
    }
    if (std::abs(l1) < std::abs(l2)) std::swap(l1, l2);
    cplx ratio = l2 / l1;
    if (close(ratio, -1.0, 1e-6)) return "A3,4";
    return param("A3,5", "alpha", ratio);
  }
  if (n == 4 && r == 3) {
    auto DD = span_split(derived_cols(L, D), n, tol).first;
    if (DD.cols() == 3) return "A3,8+A1";
    if (DD.cols() == 1) {
      CVec e = Dperp.col(0);
      Eigen::Matrix3cd M;
      for (int m = 0; m < 3; ++m) {
        CVec v = D.adjoint() * L.br(e, D.col(m));
        for (int k = 0; k < 3; ++k) M(k, m) = v(k);
      }
      Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(M);
      auto ev = es.eigenvalues();
      for (int k = 0; k < 3; ++k) {
        cplx a = ev((k + 1) % 3), b = ev((k + 2) % 3);
        if (!close(a + b, ev(k), 1e-6)) continue;
        if (std::abs(a) < std::abs(b)) std::swap(a, b);
        if (std::abs(a) < 1e-9) break;
        cplx beta = b / a;
        if (close(beta, -1.0, 1e-6)) return "A4,8";
        return param("A4,9", "beta", beta);
      }
    }
  }
  return "unknown(dim=" + std::to_string(n) + ")";
}

}  // namespace

std::string algebra_name(const std::vector<std::vector<std::vector<cplx>>>& c, double tol) { return name_of(c, tol); }

}  // namespace phever

#include "phever/geometry.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace phever {

using Tensor4 = std::array<std::array<Mat4, 4>, 4>;

std::array<Jet, 4> coordinate_jets(const JetPoint& pt, int order) {
  return {lift(pt, 0, order), lift(pt, 1, order), lift(pt, 2, order), lift(pt, 3, order)};
}

JetMat4 metric_jets(const MetricField& m, const JetPoint& pt, int order) {
  if (pt.chart != m.chart)
    throw InvalidArgument(std::string("point chart ") + chart_name(pt.chart) + " does not match metric chart " +
                          chart_name(m.chart));
  JetMat4 e = m.tetrad(pt, order);
  JetMat4 g;
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      g[a][b] = e[0][a] * e[1][b] + e[1][a] * e[0][b] + e[2][a] * e[3][b] + e[3][a] * e[2][b];
      g[b][a] = g[a][b];
    }
  return g;
}

Mat4 values(const JetMat4& m) {
  Mat4 v{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) v[a][b] = m[a][b].value();
  return v;
}

JetMat4 hh_tetrad(const Jet& x, const Jet& A, const Jet& Q, const Jet& B) {
  int ord = std::min({x.order(), A.order(), Q.order(), B.order()});
  int nv = x.nvars();
  Jet zero = Jet::constant(0.0, nv, ord), one = Jet::constant(1.0, nv, ord);
  Jet xi2 = reciprocal(x.truncated(ord) * x.truncated(ord));
  JetMat4 e;
  e[0] = {-xi2, zero, zero, zero};
  e[1] = {-B.truncated(ord), Q.truncated(ord), zero, -one};
  e[2] = {zero, xi2, zero, zero};
  e[3] = {-Q.truncated(ord), A.truncated(ord), -one, zero};
  return e;
}

MetricField hh_metric(AQBFunction aqb) {
  MetricField m;
  m.chart = Chart::QPXY;
  m.tetrad = [aqb](const JetPoint& pt, int order) {
    auto c = coordinate_jets(pt, order);
    auto f = aqb(c);
    return hh_tetrad(c[2], f[0], f[1], f[2]);
  };
  return m;
}

namespace {

// Curvature is computed in the extended precision of the jet storage.
using xcplx = std::complex<long double>;
template <class T>
using M4 = std::array<std::array<T, 4>, 4>;
template <class T>
using T4 = std::array<std::array<M4<T>, 4>, 4>;

template <class T>
struct CurvT {
  M4<T> g{}, ginv{};
  T det = 0;
  std::array<M4<T>, 4> gamma{};
  T4<T> riem{};
  M4<T> ricci{};
  T scalar = 0;
};

template <class T>
M4<T> inverse_t(const M4<T>& m) {
  Eigen::Matrix<T, 4, 4> M;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) M(a, b) = m[a][b];
  Eigen::FullPivLU<Eigen::Matrix<T, 4, 4>> lu(M);
  if (!lu.isInvertible()) throw DegenerateMetric(cplx(M.determinant()));
  Eigen::Matrix<T, 4, 4> I = lu.inverse();
  M4<T> r{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r[a][b] = I(a, b);
  return r;
}

template <class T, class U>
M4<T> convert(const M4<U>& m) {
  M4<T> r{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r[a][b] = T(m[a][b]);
  return r;
}

template <class T, class U>
T4<T> convert(const T4<U>& t) {
  T4<T> r{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) r[a][b] = convert<T>(t[a][b]);
  return r;
}

MultiIndex unit(int e) {
  MultiIndex m{0, 0, 0, 0};
  m[e] = 1;
  return m;
}

MultiIndex unit2(int e, int f) {
  MultiIndex m{0, 0, 0, 0};
  m[e] += 1;
  m[f] += 1;
  return m;
}

template <class T>
double max_abs(const T4<T>& t) {
  double m = 0;
  for (auto& a : t)
    for (auto& b : a)
      for (auto& c : b)
        for (auto v : c) m = std::max(m, static_cast<double>(std::abs(v)));
  return m;
}

template <class T>
CurvT<T> curvature_t(const JetMat4& gj) {
  if (gj[0][0].order() < 2) throw InvalidArgument("curvature needs metric jets of order 2");
  CurvT<T> C;
  std::array<M4<T>, 4> dg{};                 // dg[e][a][b]
  std::array<std::array<M4<T>, 4>, 4> ddg{}; // ddg[e][f][a][b]
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      C.g[a][b] = T(gj[a][b].xvalue());
      for (int e = 0; e < 4; ++e) {
        dg[e][a][b] = T(gj[a][b].xpartial(unit(e)));
        for (int f = 0; f < 4; ++f) ddg[e][f][a][b] = T(gj[a][b].xpartial(unit2(e, f)));
      }
    }
  Eigen::Matrix<T, 4, 4> M;
  double rowprod = 1;
  for (int a = 0; a < 4; ++a) {
    double rn = 0;
    for (int b = 0; b < 4; ++b) {
      M(a, b) = C.g[a][b];
      rn = std::max(rn, static_cast<double>(std::abs(C.g[a][b])));
    }
    rowprod *= rn;
  }
  C.det = M.determinant();
  if (!(static_cast<double>(std::abs(C.det)) > 1e-13 * rowprod)) throw DegenerateMetric(cplx(C.det));
  C.ginv = inverse_t(C.g);

  // Lower Christoffels and their derivatives.
  std::array<M4<T>, 4> gl{};                  // gl[d][b][c]
  std::array<std::array<M4<T>, 4>, 4> dgl{};  // dgl[e][d][b][c]
  const T half(0.5);
  for (int d = 0; d < 4; ++d)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        gl[d][b][c] = half * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
        for (int e = 0; e < 4; ++e) dgl[e][d][b][c] = half * (ddg[e][b][d][c] + ddg[e][c][d][b] - ddg[e][d][b][c]);
      }
  std::array<M4<T>, 4> dginv{};  // dginv[e][a][d]
  for (int e = 0; e < 4; ++e)
    for (int a = 0; a < 4; ++a)
      for (int d = 0; d < 4; ++d) {
        T s = 0;
        for (int p = 0; p < 4; ++p)
          for (int q = 0; q < 4; ++q) s -= C.ginv[a][p] * dg[e][p][q] * C.ginv[q][d];
        dginv[e][a][d] = s;
      }
  std::array<std::array<M4<T>, 4>, 4> dgam{};  // dgam[e][a][b][c] = d_e Gamma^a_bc
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        T s = 0;
        for (int d = 0; d < 4; ++d) s += C.ginv[a][d] * gl[d][b][c];
        C.gamma[a][b][c] = s;
        for (int e = 0; e < 4; ++e) {
          T t = 0;
          for (int d = 0; d < 4; ++d) t += dginv[e][a][d] * gl[d][b][c] + C.ginv[a][d] * dgl[e][d][b][c];
          dgam[e][a][b][c] = t;
        }
      }
  T4<T> up{};  // up[a][b][c][d] = R^a_bcd
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          T s = dgam[c][a][d][b] - dgam[d][a][c][b];
          for (int e = 0; e < 4; ++e) s += C.gamma[a][c][e] * C.gamma[e][d][b] - C.gamma[a][d][e] * C.gamma[e][c][b];
          up[a][b][c][d] = s;
        }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          T s = 0;
          for (int f = 0; f < 4; ++f) s += C.g[a][f] * up[f][b][c][d];
          C.riem[a][b][c][d] = s;
        }
  for (int b = 0; b < 4; ++b)
    for (int d = 0; d < 4; ++d) {
      T s = 0;
      for (int a = 0; a < 4; ++a) s += up[a][b][a][d];
      C.ricci[b][d] = s;
    }
  C.scalar = 0;
  for (int b = 0; b < 4; ++b)
    for (int d = 0; d < 4; ++d) C.scalar += C.ginv[b][d] * C.ricci[b][d];
  return C;
}

template <class T>
T4<T> weyl_t(const CurvT<T>& c) {
  const auto& g = c.g;
  const auto& R = c.ricci;
  const T half(0.5), sixth = c.scalar / T(6);
  T4<T> W{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int p = 0; p < 4; ++p)
        for (int d = 0; d < 4; ++d)
          W[a][b][p][d] = c.riem[a][b][p][d] -
                          half * (g[a][p] * R[d][b] - g[a][d] * R[p][b] - g[b][p] * R[d][a] + g[b][d] * R[p][a]) +
                          sixth * (g[a][p] * g[d][b] - g[a][d] * g[p][b]);
  return W;
}

template <class T>
T4<T> to_frame_t(const T4<T>& t, const M4<T>& E) {
  // E[mu][a]: component mu of frame vector a. Contract one slot at a time.
  T4<T> x = t, y{};
  for (int slot = 0; slot < 4; ++slot) {
    for (int i0 = 0; i0 < 4; ++i0)
      for (int i1 = 0; i1 < 4; ++i1)
        for (int i2 = 0; i2 < 4; ++i2)
          for (int i3 = 0; i3 < 4; ++i3) {
            std::array<int, 4> idx{i0, i1, i2, i3};
            T s = 0;
            for (int mu = 0; mu < 4; ++mu) {
              std::array<int, 4> j = idx;
              j[slot] = mu;
              s += x[j[0]][j[1]][j[2]][j[3]] * E[mu][idx[slot]];
            }
            y[i0][i1][i2][i3] = s;
          }
    x = y;
  }
  return x;
}

int partner(char family, int i) {
  static const int A[4] = {2, 3, 0, 1};
  static const int B[4] = {3, 2, 1, 0};
  return family == 'A' ? A[i] : B[i];
}

template <class T>
std::array<cplx, 5> coefficients(const T4<T>& F, char family, const ConventionSet& conv) {
  int l = conv.lead, n = 1 - conv.lead, m = partner(family, l), mb = partner(family, n);
  auto f = [&](int a, int b, int c, int d) { return F[a][b][c][d]; };
  std::array<T, 5> c{};
  c[0] = f(l, m, l, m);
  c[1] = T(0.5) * (f(l, m, l, n) + f(l, m, m, mb));
  c[2] = T(0.25) * (f(l, n, l, n) + T(2) * f(l, n, m, mb) + f(m, mb, m, mb));
  c[3] = T(0.5) * (f(l, n, n, mb) + f(m, mb, n, mb));
  c[4] = f(n, mb, n, mb);
  std::array<cplx, 5> out{};
  double w = 1;
  for (int k = 0; k < 5; ++k) {
    out[k] = cplx(c[k]) * (conv.scale * w);
    w *= conv.weight;
  }
  return out;
}

template <class T>
M4<T> frame2(const M4<T>& s, const M4<T>& E) {
  M4<T> r{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      T v = 0;
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) v += s[m][n] * E[m][a] * E[n][b];
      r[a][b] = v;
    }
  return r;
}

template <class T>
WeylData weyl_from(const CurvT<T>& c, const M4<T>& tetrad, const ConventionSet& conv) {
  if (!conv.calibrated) throw CalibrationRequired("conventions are not calibrated; run `phever calibrate`");
  M4<T> E = inverse_t(tetrad);
  WeylData w;
  w.R = static_cast<double>(conv.ricci_sign) * cplx(c.scalar);
  M4<T> S{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) S[a][b] = c.ricci[a][b] - c.scalar / T(4) * c.g[a][b];
  M4<T> Sf = frame2(S, E);
  for (auto& r : Sf)
    for (auto v : r) w.cab_max = std::max(w.cab_max, static_cast<double>(std::abs(v)));
  w.riemann_scale = max_abs(to_frame_t(c.riem, E));
  T4<T> F = to_frame_t(weyl_t(c), E);
  char sd = conv.sd_family, asd = conv.sd_family == 'A' ? 'B' : 'A';
  w.C = coefficients(F, sd, conv);
  w.Cdot = coefficients(F, asd, conv);
  return w;
}

CurvT<cplx> narrow(const Curvature& c) {
  CurvT<cplx> r;
  r.g = c.g;
  r.ginv = c.ginv;
  r.det = c.det;
  r.gamma = c.gamma;
  r.riem = c.riem;
  r.ricci = c.ricci;
  r.scalar = c.scalar;
  return r;
}

}  // namespace

Mat4 inverse(const Mat4& m) { return inverse_t(m); }

Curvature curvature(const JetMat4& gj) {
  CurvT<xcplx> x = curvature_t<xcplx>(gj);
  Curvature C;
  C.g = convert<cplx>(x.g);
  C.ginv = convert<cplx>(x.ginv);
  C.det = cplx(x.det);
  for (int a = 0; a < 4; ++a) C.gamma[a] = convert<cplx>(x.gamma[a]);
  C.riem = convert<cplx>(x.riem);
  C.ricci = convert<cplx>(x.ricci);
  C.scalar = cplx(x.scalar);
  return C;
}

Curvature curvature(const MetricField& m, const JetPoint& pt) { return curvature(metric_jets(m, pt, 2)); }

Tensor4 weyl_tensor(const Curvature& c) { return weyl_t(narrow(c)); }

Tensor4 to_frame(const Tensor4& t, const Mat4& E) { return to_frame_t(t, E); }

WeylData weyl_coefficients(const Curvature& c, const Mat4& tetrad, const ConventionSet& conv) {
  return weyl_from(narrow(c), tetrad, conv);
}

WeylData weyl_coefficients(const MetricField& m, const ConventionSet& conv, const JetPoint& pt) {
  if (!conv.calibrated) throw CalibrationRequired("conventions are not calibrated; run `phever calibrate`");
  CurvT<xcplx> c = curvature_t<xcplx>(metric_jets(m, pt, 2));
  JetMat4 e = m.tetrad(pt, 0);
  M4<xcplx> t{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) t[a][b] = e[a][b].xvalue();
  return weyl_from(c, t, conv);
}

// ---- conventions ----

namespace {

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string canonical(const ConventionSet& c) {
  return "ricci_sign=" + std::to_string(c.ricci_sign) + ";sd_family=" + std::string(1, c.sd_family) +
         ";lead=E" + std::to_string(c.lead + 1) + ";weight=" + std::to_string(c.weight) + ";scale=" + fmt(c.scale);
}

}  // namespace

std::string ConventionSet::describe() const { return canonical(*this); }

std::string ConventionSet::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical(*this)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool ConventionSet::operator==(const ConventionSet& o) const {
  return calibrated == o.calibrated && ricci_sign == o.ricci_sign && sd_family == o.sd_family && lead == o.lead &&
         weight == o.weight && scale == o.scale;
}

std::string ConventionSet::serialize() const {
  std::ostringstream os;
  os << "# phever curvature conventions\n"
     << "version=1\n"
     << "ricci_sign=" << ricci_sign << "\n"
     << "sd_family=" << sd_family << "\n"
     << "lead=E" << lead + 1 << "\n"
     << "weight=" << weight << "\n"
     << "scale=" << fmt(scale) << "\n"
     << "fingerprint=" << fingerprint() << "\n";
  return os.str();
}

ConventionSet ConventionSet::parse(const std::string& text) {
  ConventionSet c;
  std::istringstream is(text);
  std::string line, fp;
  int lineno = 0;
  bool have[6] = {false, false, false, false, false, false};
  while (std::getline(is, line)) {
    ++lineno;
    std::size_t s = line.find_first_not_of(" \t\r");
    if (s == std::string::npos || line[s] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, static_cast<int>(s) + 1, "expected key=value");
    std::string key = line.substr(s, eq - s), val = line.substr(eq + 1);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    while (!val.empty() && std::isspace(static_cast<unsigned char>(val.back()))) val.pop_back();
    std::size_t vs = val.find_first_not_of(" \t");
    val = vs == std::string::npos ? "" : val.substr(vs);
    int col = static_cast<int>(eq) + 2;
    auto as_int = [&](const std::string& v) {
      int out = 0;
      auto r = std::from_chars(v.data(), v.data() + v.size(), out);
      if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(lineno, col, "integer expected");
      return out;
    };
    if (key == "version") {
      if (val != "1") throw ConfigError(lineno, col, "unsupported calibration version " + val);
      have[0] = true;
    } else if (key == "ricci_sign") {
      c.ricci_sign = as_int(val);
      if (c.ricci_sign != 1 && c.ricci_sign != -1) throw ConfigError(lineno, col, "ricci_sign must be 1 or -1");
      have[1] = true;
    } else if (key == "sd_family") {
      if (val != "A" && val != "B") throw ConfigError(lineno, col, "sd_family must be A or B");
      c.sd_family = val[0];
      have[2] = true;
    } else if (key == "lead") {
      if (val != "E1" && val != "E2") throw ConfigError(lineno, col, "lead must be E1 or E2");
      c.lead = val == "E1" ? 0 : 1;
      have[3] = true;
    } else if (key == "weight") {
      c.weight = as_int(val);
      if (c.weight != 1 && c.weight != -1) throw ConfigError(lineno, col, "weight must be 1 or -1");
      have[4] = true;
    } else if (key == "scale") {
      auto r = std::from_chars(val.data(), val.data() + val.size(), c.scale);
      if (r.ec != std::errc() || r.ptr != val.data() + val.size() || c.scale == 0)
        throw ConfigError(lineno, col, "nonzero number expected");
      have[5] = true;
    } else if (key == "fingerprint") {
      fp = val;
    } else {
      throw ConfigError(lineno, static_cast<int>(s) + 1, "unknown key '" + key + "'");
    }
  }
  for (bool h : have)
    if (!h) throw ConfigError(lineno, 1, "calibration file is missing a required key");
  if (fp != c.fingerprint()) throw ConfigError(lineno, 1, "fingerprint mismatch (file edited by hand?)");
  c.calibrated = true;
  return c;
}

std::vector<ConventionSet> convention_candidates() {
  std::vector<ConventionSet> out;
  for (int rs : {1, -1})
    for (char fam : {'A', 'B'})
      for (int lead : {0, 1})
        for (int w : {1, -1})
          for (double sc : {0.5, 1.0, 2.0, 4.0, -0.5, -1.0, -2.0, -4.0}) {
            ConventionSet c;
            c.calibrated = true;
            c.ricci_sign = rs;
            c.sd_family = fam;
            c.lead = lead;
            c.weight = w;
            c.scale = sc;
            out.push_back(c);
          }
  return out;
}

MetricField calibration_reference(cplx lambda, cplx mu) {
  return hh_metric([lambda, mu](const std::array<Jet, 4>& c) {
    const Jet& x = c[2];
    const Jet& y = c[3];
    Jet base = 0.5 * mu * x * x * x + lambda / 3.0;
    return std::array<Jet, 3>{base, base * y / x, base * y * y / (x * x)};
  });
}

std::vector<JetPoint> calibration_points() {
  return {
      {{cplx(0.3), cplx(0.7), cplx(1.2), cplx(0.5)}, Chart::QPXY},
      {{cplx(0.9, 0.2), cplx(0.2, -0.1), cplx(0.8, 0.3), cplx(1.1, 0.4)}, Chart::QPXY},
      {{cplx(1.3), cplx(0.4, 0.5), cplx(1.5, -0.2), cplx(0.3, 0.7)}, Chart::QPXY},
      {{cplx(0.5, -0.3), cplx(1.1), cplx(0.6, 0.1), cplx(0.9, -0.6)}, Chart::QPXY},
      {{cplx(0.7, 0.6), cplx(0.8, 0.8), cplx(1.0, 0.5), cplx(-0.4, 0.2)}, Chart::QPXY},
  };
}

CalibrationOutcome calibrate(const std::vector<ConventionSet>& candidates) {
  const cplx lambda = 3.0, mu = 1.0;
  MetricField ref = calibration_reference(lambda, mu);
  std::vector<bool> alive(candidates.size(), true);
  auto near = [](cplx a, cplx b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
  for (const JetPoint& pt : calibration_points()) {
    Curvature c = curvature(ref, pt);
    Mat4 e = values(ref.tetrad(pt, 0));
    cplx x = pt.coords[2], y = pt.coords[3];
    std::array<cplx, 5> sd{0.0, 0.0, -2.0 * mu * x * x * x, 0.0, 0.0};
    std::array<cplx, 5> asd{0.0, 0.0, -2.0 * lambda / 3.0, 2.0 * lambda * y / x, -4.0 * lambda * y * y / (x * x)};
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (!alive[k]) continue;
      ConventionSet cand = candidates[k];
      cand.calibrated = true;
      WeylData w = weyl_coefficients(c, e, cand);
      bool ok = near(w.R, -4.0 * lambda);
      for (int i = 0; i < 5 && ok; ++i) ok = near(w.C[i], sd[i]) && near(w.Cdot[i], asd[i]);
      alive[k] = ok;
    }
  }
  CalibrationOutcome out;
  out.candidates = static_cast<int>(candidates.size());
  std::vector<ConventionSet> keep;
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (alive[k]) {
      keep.push_back(candidates[k]);
      out.survivors.push_back(candidates[k].describe());
    }
  if (keep.size() != 1)
    throw CalibrationAmbiguous(std::to_string(keep.size()) + " convention candidates reproduce the anchors",
                               out.survivors);
  out.chosen = keep[0];
  out.chosen.calibrated = true;
  return out;
}

std::string default_calibration_path() {
  const char* env = std::getenv("PHEVER_CALIBRATION");
  if (env && *env) return env;
  return std::string(PHEVER_DATA_DIR) + "/calibration.txt";
}

ConventionSet load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CalibrationRequired("no calibration file at " + path + "; run `phever calibrate`");
  std::stringstream ss;
  ss << in.rdbuf();
  return ConventionSet::parse(ss.str());
}

void save_calibration(const ConventionSet& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write calibration file " + path);
  out << c.serialize();
}

}  // namespace phever

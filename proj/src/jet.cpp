#include "phever/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace phever {

const char* chart_name(Chart c) {
  switch (c) {
    case Chart::QPXY: return "qpxy";
    case Chart::QPXZ: return "qpxz";
    case Chart::QPXW: return "qpxw";
  }
  return "?";
}

struct JetLayout {
  int nvars = 1;
  int order = 0;
  std::vector<MultiIndex> idx;
  std::vector<int> dense;  // base-(order+1) code -> rank
  std::vector<std::array<int, 3>> mul;

  int code(const MultiIndex& a) const {
    int c = 0;
    for (int v = nvars - 1; v >= 0; --v) c = c * (order + 1) + a[v];
    return c;
  }
  int rank(const MultiIndex& a) const {
    int deg = 0;
    for (int v = 0; v < 4; ++v) {
      if (a[v] < 0) return -1;
      if (v >= nvars && a[v] != 0) return -1;
      deg += a[v];
    }
    if (deg > order) return -1;
    return dense[code(a)];
  }
};

namespace {

void enumerate(int nvars, int deg, int var, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (var == nvars - 1) {
    cur[var] = deg;
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int k = deg; k >= 0; --k) {
    cur[var] = k;
    enumerate(nvars, deg - k, var + 1, cur, out);
  }
  cur[var] = 0;
}

std::shared_ptr<const JetLayout> make_layout(int nvars, int order) {
  auto L = std::make_shared<JetLayout>();
  L->nvars = nvars;
  L->order = order;
  for (int d = 0; d <= order; ++d) {
    MultiIndex cur{0, 0, 0, 0};
    enumerate(nvars, d, 0, cur, L->idx);
  }
  int span = 1;
  for (int v = 0; v < nvars; ++v) span *= order + 1;
  L->dense.assign(span, -1);
  for (std::size_t k = 0; k < L->idx.size(); ++k) L->dense[L->code(L->idx[k])] = static_cast<int>(k);
  for (std::size_t i = 0; i < L->idx.size(); ++i) {
    int di = 0;
    for (int v = 0; v < nvars; ++v) di += L->idx[i][v];
    for (std::size_t j = 0; j < L->idx.size(); ++j) {
      int dj = 0;
      for (int v = 0; v < nvars; ++v) dj += L->idx[j][v];
      if (di + dj > order) continue;
      MultiIndex s{};
      for (int v = 0; v < 4; ++v) s[v] = L->idx[i][v] + L->idx[j][v];
      L->mul.push_back({static_cast<int>(i), static_cast<int>(j), L->rank(s)});
    }
  }
  return L;
}

std::shared_ptr<const JetLayout> layout(int nvars, int order) {
  if (nvars < 1 || nvars > 4) throw InvalidArgument("jet nvars must be in 1..4");
  if (order < 0) throw InvalidArgument("jet order must be non-negative");
  if (order > 16) throw InvalidArgument("jet order too large");
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nvars, order}];
  if (!slot) slot = make_layout(nvars, order);
  return slot;
}

double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

void check_compatible(const Jet& a, const Jet& b) {
  if (a.nvars() != b.nvars()) throw InvalidArgument("jet variable counts differ");
}

// Sum_k d[k] * t^k for nilpotent t, by Horner.
Jet series(const std::vector<xcplx>& d, const Jet& t) {
  int n = static_cast<int>(d.size()) - 1;
  Jet r(t.nvars(), t.order());
  r.coeffs()[0] = d[n];
  for (int k = n - 1; k >= 0; --k) {
    r = r * t;
    r.coeffs()[0] += d[k];
  }
  return r;
}

}  // namespace

namespace {
thread_local double g_margin = 0;
}

AdmissionGuard::AdmissionGuard(double margin) : prev_(g_margin) { g_margin = margin; }
AdmissionGuard::~AdmissionGuard() { g_margin = prev_; }
double admission_margin() { return g_margin; }

void check_branch(cplx base, const char* fn) {
  if (base == cplx(0.0, 0.0)) throw SingularEvaluation(std::string(fn) + " of zero");
  if (g_margin > 0 && std::abs(base) < g_margin) throw SingularEvaluation(std::string(fn) + " argument near zero");
  if (base.real() < 0 && std::abs(base.imag()) < std::max(kBranchGuard, g_margin * std::abs(base))) {
    std::ostringstream os;
    os << fn << " argument " << base << " lies on the principal branch cut";
    throw BranchAmbiguity(os.str());
  }
}

Jet::Jet() : layout_(layout(1, 0)), c_(1, 0.0) {}

Jet::Jet(int nvars, int order) : layout_(layout(nvars, order)), c_(layout_->idx.size(), 0.0) {}

Jet Jet::constant(cplx v, int nvars, int order) {
  Jet j(nvars, order);
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(cplx v, int var, int nvars, int order) {
  if (var < 0 || var >= nvars) throw InvalidArgument("variable index out of range");
  Jet j(nvars, order);
  j.c_[0] = v;
  if (order >= 1) {
    MultiIndex a{0, 0, 0, 0};
    a[var] = 1;
    j.c_[j.layout_->rank(a)] = 1.0;
  }
  return j;
}

int Jet::nvars() const { return layout_->nvars; }
int Jet::order() const { return layout_->order; }
const MultiIndex& Jet::index(std::size_t k) const { return layout_->idx[k]; }
int Jet::rank(const MultiIndex& a) const { return layout_->rank(a); }

xcplx Jet::xcoeff(const MultiIndex& a) const {
  int r = layout_->rank(a);
  return r < 0 ? xcplx(0.0L) : c_[r];
}

void Jet::set_coeff(const MultiIndex& a, xcplx v) {
  int r = layout_->rank(a);
  if (r < 0) throw InvalidArgument("multi-index outside jet");
  c_[r] = v;
}

xcplx Jet::xpartial(const MultiIndex& a) const {
  long double f = 1;
  for (int v = 0; v < 4; ++v) f *= factorial(a[v]);
  return xcoeff(a) * f;
}

Jet Jet::d(int var) const {
  if (var < 0 || var >= nvars()) throw InvalidArgument("variable index out of range");
  if (order() == 0) return Jet(nvars(), 0);
  Jet r(nvars(), order() - 1);
  for (std::size_t k = 0; k < r.size(); ++k) {
    MultiIndex a = r.index(k);
    a[var] += 1;
    r.c_[k] = c_[layout_->rank(a)] * static_cast<long double>(a[var]);
  }
  return r;
}

Jet Jet::truncated(int ord) const {
  if (ord >= order()) return *this;
  Jet r(nvars(), ord);
  for (std::size_t k = 0; k < r.size(); ++k) r.c_[k] = c_[k];  // graded layout: prefix
  return r;
}

Jet Jet::nilpotent() const {
  Jet r = *this;
  r.c_[0] = 0.0L;
  return r;
}

Jet Jet::embed(int nv, const std::array<int, 4>& map) const {
  Jet r(nv, order());
  for (std::size_t k = 0; k < size(); ++k) {
    MultiIndex a{0, 0, 0, 0};
    const MultiIndex& s = index(k);
    for (int v = 0; v < nvars(); ++v) {
      if (map[v] < 0 || map[v] >= nv) throw InvalidArgument("embedding slot out of range");
      a[map[v]] += s[v];
    }
    r.c_[r.layout_->rank(a)] += c_[k];
  }
  return r;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

Jet& Jet::operator+=(const Jet& b) {
  check_compatible(*this, b);
  if (b.order() < order()) *this = truncated(b.order());
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += b.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& b) {
  check_compatible(*this, b);
  if (b.order() < order()) *this = truncated(b.order());
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= b.c_[k];
  return *this;
}

Jet operator*(const Jet& a0, const Jet& b0) {
  check_compatible(a0, b0);
  int ord = std::min(a0.order(), b0.order());
  const Jet a = a0.truncated(ord);
  const Jet b = b0.truncated(ord);
  Jet r(a.nvars(), ord);
  for (const auto& t : r.layout_->mul) r.c_[t[2]] += a.c_[t[0]] * b.c_[t[1]];
  return r;
}

Jet& Jet::operator*=(const Jet& b) { return *this = *this * b; }
Jet& Jet::operator/=(const Jet& b) { return *this = *this / b; }
Jet& Jet::operator+=(cplx s) {
  c_[0] += xcplx(s);
  return *this;
}
Jet& Jet::operator-=(cplx s) {
  c_[0] -= xcplx(s);
  return *this;
}
Jet& Jet::operator*=(cplx s) {
  xcplx x(s);
  for (auto& v : c_) v *= x;
  return *this;
}
Jet& Jet::operator/=(cplx s) {
  if (s == cplx(0.0)) throw SingularEvaluation("division of jet by zero scalar");
  xcplx x(s);
  for (auto& v : c_) v /= x;
  return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator+(Jet a, cplx s) { return a += s; }
Jet operator+(cplx s, Jet a) { return a += s; }
Jet operator-(Jet a, cplx s) { return a -= s; }
Jet operator-(cplx s, const Jet& a) { return (-a) += s; }
Jet operator*(Jet a, cplx s) { return a *= s; }
Jet operator*(cplx s, Jet a) { return a *= s; }
Jet operator/(Jet a, cplx s) { return a /= s; }
Jet operator/(cplx s, const Jet& a) { return reciprocal(a) *= s; }

Jet reciprocal(const Jet& a) {
  xcplx v = a.xvalue();
  if (v == xcplx(0.0L)) throw SingularEvaluation("division by a jet with zero value");
  if (std::abs(v) < g_margin) throw SingularEvaluation("denominator near zero");
  std::vector<xcplx> d(a.order() + 1);
  d[0] = 1.0L / v;
  for (int k = 1; k <= a.order(); ++k) d[k] = -d[k - 1] / v;
  return series(d, a.nilpotent());
}

Jet exp(const Jet& a) {
  std::vector<xcplx> d(a.order() + 1);
  d[0] = std::exp(a.xvalue());
  for (int k = 1; k <= a.order(); ++k) d[k] = d[k - 1] / static_cast<long double>(k);
  return series(d, a.nilpotent());
}

Jet log(const Jet& a) {
  xcplx v = a.xvalue();
  check_branch(a.value(), "ln");
  std::vector<xcplx> d(a.order() + 1);
  d[0] = std::log(v);
  xcplx p = 1.0L;
  for (int k = 1; k <= a.order(); ++k) {
    p /= v;
    d[k] = (k % 2 == 1 ? 1.0L : -1.0L) * p / static_cast<long double>(k);
  }
  return series(d, a.nilpotent());
}

Jet pow(const Jet& a, int n) {
  if (n < 0) return reciprocal(pow(a, -n));
  Jet r = Jet::constant(1.0, a.nvars(), a.order());
  Jet base = a;
  while (n > 0) {
    if (n & 1) r = r * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return r;
}

Jet pow(const Jet& a, cplx alpha) {
  if (alpha.imag() == 0 && alpha.real() == std::round(alpha.real()) && std::abs(alpha.real()) <= 64)
    return pow(a, static_cast<int>(alpha.real()));
  xcplx v = a.xvalue(), al(alpha);
  check_branch(a.value(), "pow");
  std::vector<xcplx> d(a.order() + 1);
  d[0] = std::exp(al * std::log(v));
  for (int k = 1; k <= a.order(); ++k)
    d[k] = d[k - 1] * (al - static_cast<long double>(k - 1)) / (static_cast<long double>(k) * v);
  return series(d, a.nilpotent());
}

Jet sqrt(const Jet& a) {
  check_branch(a.value(), "sqrt");
  return pow(a, cplx(0.5));
}

Jet sin(const Jet& a) {
  xcplx s = std::sin(a.xvalue()), c = std::cos(a.xvalue());
  const xcplx cyc[4] = {s, c, -s, -c};
  std::vector<xcplx> d(a.order() + 1);
  long double f = 1;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) f *= k;
    d[k] = cyc[k % 4] / f;
  }
  return series(d, a.nilpotent());
}

Jet cos(const Jet& a) {
  xcplx s = std::sin(a.xvalue()), c = std::cos(a.xvalue());
  const xcplx cyc[4] = {c, -s, -c, s};
  std::vector<xcplx> d(a.order() + 1);
  long double f = 1;
  for (int k = 0; k <= a.order(); ++k) {
    if (k > 0) f *= k;
    d[k] = cyc[k % 4] / f;
  }
  return series(d, a.nilpotent());
}

Jet compose(const Jet& outer, const std::vector<Jet>& inner) {
  if (static_cast<int>(inner.size()) != outer.nvars())
    throw InvalidArgument("compose: argument count must equal the outer variable count");
  int nv = inner.at(0).nvars();
  int ord = inner[0].order();
  for (const auto& j : inner) {
    if (j.nvars() != nv) throw InvalidArgument("compose: inner jets differ in variable count");
    ord = std::min(ord, j.order());
  }
  // Powers of each nilpotent shift up to the needed degree.
  int maxdeg = std::min(outer.order(), ord);
  std::vector<std::vector<Jet>> pw(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) {
    Jet t = inner[i].truncated(ord).nilpotent();
    pw[i].push_back(Jet::constant(1.0, nv, ord));
    for (int k = 1; k <= maxdeg; ++k) pw[i].push_back(pw[i].back() * t);
  }
  Jet r(nv, ord);
  for (std::size_t k = 0; k < outer.size(); ++k) {
    const MultiIndex& a = outer.index(k);
    int deg = 0;
    for (int v = 0; v < outer.nvars(); ++v) deg += a[v];
    if (deg > maxdeg || outer.coeffs()[k] == xcplx(0.0L)) continue;
    Jet term(nv, ord);
    term.c_[0] = outer.coeffs()[k];
    for (int v = 0; v < outer.nvars(); ++v)
      if (a[v] > 0) term = term * pw[v][a[v]];
    r += term;
  }
  return r;
}

std::vector<Jet> invert(const std::vector<Jet>& map, const std::vector<cplx>& at) {
  int n = static_cast<int>(map.size());
  if (n < 1 || n > 4 || static_cast<int>(at.size()) != n)
    throw InvalidArgument("invert: between one and four component jets and matching point required");
  int ord = map[0].order();
  for (const auto& m : map) {
    if (m.nvars() != n) throw InvalidArgument("invert: map must be square");
    ord = std::min(ord, m.order());
  }
  // Inverse Jacobian at the expansion point by Gauss-Jordan elimination.
  std::vector<std::vector<xcplx>> a(n, std::vector<xcplx>(2 * n, 0.0L));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      MultiIndex e{0, 0, 0, 0};
      e[j] = 1;
      a[i][j] = ord >= 1 ? map[i].xcoeff(e) : xcplx(i == j ? 1.0L : 0.0L);
    }
    a[i][n + i] = 1.0L;
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) == 0.0L) throw SingularEvaluation("invert: singular Jacobian");
    std::swap(a[c], a[piv]);
    xcplx d = a[c][c];
    for (auto& v : a[c]) v /= d;
    for (int r = 0; r < n; ++r)
      if (r != c) {
        xcplx f = a[r][c];
        for (int k = 0; k < 2 * n; ++k) a[r][k] -= f * a[c][k];
      }
  }
  std::vector<Jet> v(n), u(n);
  for (int i = 0; i < n; ++i) {
    v[i] = Jet::variable(map[i].value(), i, n, ord);
    v[i].c_[0] = map[i].xvalue();
    u[i] = Jet::constant(at[i], n, ord);
  }
  // Fixed-Jacobian Newton steps; each one fixes one more order.
  for (int k = 0; k < ord; ++k) {
    std::vector<Jet> r(n);
    for (int i = 0; i < n; ++i) r[i] = compose(map[i], u) - v[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (std::size_t t = 0; t < u[i].size(); ++t) u[i].c_[t] -= a[i][n + j] * r[j].c_[t];
  }
  return u;
}

Jet lift(const JetPoint& pt, int var, int order) {
  if (order < 0) throw InvalidArgument("lift: negative order");
  if (var < 0 || var > 3) throw InvalidArgument("lift: variable index out of range");
  return Jet::variable(pt.coords[var], var, 4, order);
}

}  // namespace phever

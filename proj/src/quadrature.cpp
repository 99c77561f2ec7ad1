#include "phever/quadrature.hpp"

#include <cmath>
#include <queue>

namespace phever {

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  cplx a, b;
  Jet kronrod;
  double err;
  int depth;
  bool operator<(const Piece& o) const { return err < o.err; }
};

Piece gk15(const std::function<Jet(cplx)>& f, cplx a, cplx b, int depth) {
  cplx c = 0.5 * (a + b), h = 0.5 * (b - a);
  Jet fc = f(c);
  Jet k = fc * kWgk[7];
  Jet g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    Jet s = f(c - h * kXgk[j]) + f(c + h * kXgk[j]);
    k += s * kWgk[j];
    if (j % 2 == 1) g += s * kWg[j / 2];
  }
  k *= h;
  g *= h;
  double err = 0;
  for (std::size_t i = 0; i < k.size(); ++i)
    err = std::max(err, static_cast<double>(std::abs(k.coeffs()[i] - g.coeffs()[i])));
  return {a, b, k, err, depth};
}

double jet_norm(const Jet& j) {
  double m = 0;
  for (auto c : j.coeffs()) m = std::max(m, static_cast<double>(std::abs(c)));
  return m;
}

}  // namespace

QuadResult integrate_segment(const std::function<Jet(cplx)>& f, cplx a, cplx b, const QuadOptions& opt) {
  if (!(opt.tol > 0)) throw InvalidArgument("quadrature tolerance must be positive");
  std::priority_queue<Piece> heap;
  heap.push(gk15(f, a, b, 0));
  Jet total = heap.top().kronrod;
  double err = heap.top().err;
  int count = 1;
  while (err > opt.tol * std::max(1.0, jet_norm(total))) {
    Piece worst = heap.top();
    if (worst.depth >= opt.max_depth || count > opt.max_intervals) throw QuadratureFailure(worst.a, worst.b, worst.err);
    heap.pop();
    cplx m = 0.5 * (worst.a + worst.b);
    Piece l = gk15(f, worst.a, m, worst.depth + 1), r = gk15(f, m, worst.b, worst.depth + 1);
    heap.push(l);
    heap.push(r);
    ++count;
    total += l.kronrod + r.kronrod - worst.kronrod;
    err += l.err + r.err - worst.err;
  }
  return {total, err, count};
}

Jet integrate(const IntegralProfile& p, cplx q, cplx w, int order, double* error) {
  if (order < 0) throw InvalidArgument("negative jet order");
  auto f = [&](cplx s) {
    return p.integrand(Jet::variable(q, 0, 1, order), Jet::constant(s, 1, order));
  };
  QuadResult qr = integrate_segment(f, p.w0, w, p.opt);
  if (error) *error = qr.error;
  Jet out(2, order);
  for (int a = 0; a <= order; ++a) out.set_coeff({a, 0, 0, 0}, qr.value.xcoeff({a, 0, 0, 0}));
  if (order >= 1) {
    Jet fe = p.integrand(Jet::variable(q, 0, 2, order - 1), Jet::variable(w, 1, 2, order - 1));
    for (std::size_t k = 0; k < fe.size(); ++k) {
      MultiIndex m = fe.index(k);
      out.set_coeff({m[0], m[1] + 1, 0, 0}, fe.coeffs()[k] / static_cast<long double>(m[1] + 1));
    }
  }
  return out;
}

}  // namespace phever

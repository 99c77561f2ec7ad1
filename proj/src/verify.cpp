#include "phever/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace phever {

using ojson = nlohmann::ordered_json;

// ---- configuration ----

namespace {

std::pair<int, int> line_col(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::pair<int, int> key_position(const std::string& text, const std::string& key) {
  auto pos = text.find("\"" + key + "\"");
  return line_col(text, pos == std::string::npos ? 0 : pos);
}

std::string as_text(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  throw InvalidArgument("expected a string or a number");
}

}  // namespace

SuiteConfig parse_config(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    auto [l, c] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError(l, c, e.what());
  }
  if (!j.is_object()) throw ConfigError(1, 1, "top level must be an object");
  auto fail = [&](const std::string& key, const std::string& msg) {
    auto [l, c] = key_position(text, key);
    throw ConfigError(l, c, msg);
  };
  SuiteConfig cfg;
  std::string family;
  std::vector<std::pair<std::string, std::string>> sets;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const ojson& v = it.value();
    try {
      if (k == "family") {
        family = v.get<std::string>();
      } else if (k == "set") {
        if (!v.is_object()) fail(k, "'set' must be an object of name: expression");
        for (auto s = v.begin(); s != v.end(); ++s) sets.emplace_back(s.key(), as_text(s.value()));
      } else if (k == "points") {
        cfg.points = v.get<int>();
        if (cfg.points < 1) fail(k, "points must be >= 1");
      } else if (k == "seed") {
        cfg.seed = v.get<std::uint64_t>();
      } else if (k == "box") {
        if (!v.is_array() || v.size() != 2) fail(k, "box must be [lo, hi]");
        cfg.box_lo = v[0].get<double>();
        cfg.box_hi = v[1].get<double>();
        if (!(cfg.box_lo < cfg.box_hi)) fail(k, "box must satisfy lo < hi");
      } else if (k == "real_slice") {
        cfg.real_slice = v.get<bool>();
      } else if (k == "jet_order") {
        cfg.jet_order = v.get<int>();
        if (cfg.jet_order < 4 || cfg.jet_order > 8) fail(k, "jet_order must be in 4..8");
      } else if (k == "tolerances") {
        if (!v.is_object()) fail(k, "tolerances must be an object");
        for (auto t = v.begin(); t != v.end(); ++t) {
          double x = t.value().get<double>();
          if (!(x > 0)) fail(t.key(), "tolerance must be positive");
          const std::string& n = t.key();
          if (n == "einstein") cfg.tol.einstein = x;
          else if (n == "structural") cfg.tol.structural = x;
          else if (n == "classify") cfg.tol.classify = x;
          else if (n == "nonvanish") cfg.tol.nonvanish = x;
          else if (n == "residual") cfg.tol.residual = x;
          else fail(n, "unknown tolerance '" + n + "'");
        }
      } else {
        fail(k, "unknown key '" + k + "'");
      }
    } catch (const ojson::exception& e) {
      fail(k, std::string("bad value for '") + k + "': " + e.what());
    } catch (const InvalidArgument& e) {
      fail(k, e.what());
    }
  }
  if (family.empty()) throw ConfigError(1, 1, "missing 'family'");
  try {
    cfg.family = make_family(family, sets);
  } catch (const InvalidArgument& e) {
    fail("family", e.what());
  }
  return cfg;
}

SuiteConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, 0, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---- per-point evaluation ----

std::pair<double, std::string> real_slice_check(const FamilyModel& m, const JetPoint& pt) {
  Mat4 g = values(metric_jets(m.metric, pt, 0));
  Eigen::Matrix4d re;
  double imag = 0, scale = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      re(a, b) = g[a][b].real();
      imag = std::max(imag, std::abs(g[a][b].imag()));
      scale = std::max(scale, std::abs(g[a][b]));
    }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(re);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 4);
  std::sort(ev.rbegin(), ev.rend());
  std::string sig = "(";
  for (int i = 0; i < 4; ++i) {
    double e = ev[i];
    sig += (i ? "," : "") + std::string(std::abs(e) <= 1e-12 * scale ? "0" : (e > 0 ? "+" : "-"));
  }
  return {imag / std::max(1e-300, scale), sig + ")"};
}

namespace {

template <std::size_t N>
double max_rel(const std::array<Residual, N>& rs) {
  double w = 0;
  for (const auto& r : rs) w = std::max(w, r.rel());
  return w;
}

bool is_type_ii(const std::string& id) { return id == "typeII-pppp" || id == "typeII-ppmm"; }

PointRecord evaluate_point(const FamilyModel& m, const ConventionSet& conv, const SuiteConfig& cfg, int draw,
                           const JetPoint& pt) {
  PointRecord r;
  r.draw = draw;
  r.point = pt;
  try {
    r.qpxy = to_qpxy(m, pt);
    cplx x = r.qpxy.coords[2];
    WeylData w = weyl_coefficients(m.metric, conv, pt);
    r.r_err = std::abs(w.R + 4.0 * m.lambda);
    r.cab_rel = w.cab_max / std::max(1.0, w.riemann_scale);
    cplx c3 = -2.0 * m.mu0 * x * x * x;
    std::array<cplx, 5> sd_expected = {0.0, 0.0, c3, 0.0, 0.0};
    for (int i = 0; i < 5; ++i) r.sd_err = std::max(r.sd_err, std::abs(w.C[i] - sd_expected[i]));
    r.sd_err /= std::max(1.0, std::abs(c3));
    r.cdot = w.Cdot;
    for (auto c : w.Cdot) r.cdot_max = std::max(r.cdot_max, std::abs(c));
    try {
      r.sd_type = petrov_from_coefficients(w.C, cfg.tol.classify).type;
    } catch (const AmbiguousClassification& e) {
      r.sd_type = "AMBIGUOUS(" + e.first + "|" + e.second + ")";
    }
    try {
      r.asd_type = petrov_from_coefficients(w.Cdot, cfg.tol.classify).type;
    } catch (const AmbiguousClassification& e) {
      r.asd_type = "AMBIGUOUS(" + e.first + "|" + e.second + ")";
    }
    if (m.key) {
      auto abq = abqs_from_W(*m.key, r.qpxy, 2);
      r.middle = max_rel(middle_triplet_residuals(abq[0], abq[1], abq[2], x, m.lambda));
      r.hh = hh_residual(*m.key, r.qpxy).rel();
    }
    if (m.ed) {
      EDJets ed = m.ed(pt, cfg.jet_order);
      r.table1 = table1_type(ed, m.lambda, cfg.tol.nonvanish).type;
      auto pred = cdot_from_ed(ed, x, r.qpxy.coords[3], m.lambda);
      double scale = std::max(1.0, r.cdot_max);
      for (int i = 0; i < 5; ++i) r.cdot_formula = std::max(r.cdot_formula, std::abs(pred[i] - w.Cdot[i]) / scale);
      r.reduced = max_rel(reduced_residuals(ed, m.lambda));
      auto abq = ed_abq(ed, r.qpxy, m.lambda, m.mu0, 2);
      r.middle = max_rel(middle_triplet_residuals(abq[0], abq[1], abq[2], x, m.lambda));
      r.nullstring = max_rel(nullstring_residuals(abq, r.qpxy));
      r.optics = congruence_optics(m, pt, cfg.tol.nonvanish).symbol();
      for (const auto& g : m.generators) r.master.push_back(max_rel(master_residual(ed, g, m.lambda, m.mu0)));
      if (is_type_ii(m.spec.id)) r.obstruction = second_symmetry_obstruction(ed);
    }
    r.conditions = m.conditions(pt);
    for (const auto& [n, v] : m.identities(pt)) r.identities.emplace_back(n, v.rel());
    for (const auto& g : m.generators) r.killing.push_back(killing_residual(m, g, pt).rel());
    if (cfg.real_slice) std::tie(r.imag_rel, r.signature) = real_slice_check(m, pt);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

struct ClaimBuilder {
  std::vector<ClaimResult>& out;
  void add(const std::string& name, double worst, double tol, const std::string& detail = "") {
    out.push_back({name, worst <= tol ? "PASS" : "FAIL", detail, worst, tol});
  }
  void add_flag(const std::string& name, const std::string& verdict, const std::string& detail) {
    out.push_back({name, verdict, detail, 0, 0});
  }
};

}  // namespace

Sample sample_points(const FamilyModel& m, const SuiteConfig& cfg) {
  Sample out;
  // Sequential draws in seed order.
  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&] { return cfg.box_lo + (cfg.box_hi - cfg.box_lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const int max_draws = 100 * cfg.points;
  int draw = 0;
  while (static_cast<int>(out.accepted.size()) < cfg.points && draw < max_draws) {
    JetPoint pt;
    pt.chart = m.chart;
    for (auto& c : pt.coords) {
      double re = uniform(), im = uniform();
      c = cplx(re, cfg.real_slice ? 0.0 : im);
    }
    ++draw;
    try {
      m.admit(pt);
      for (const auto& oc : m.conditions(pt))
        if (oc.required && !(oc.magnitude > cfg.tol.nonvanish)) throw FamilyConstraint(oc.name, "vanishes at the point");
    } catch (const FamilyConstraint& e) {
      out.rejected[e.constraint]++;
      continue;
    } catch (const Error& e) {
      out.rejected["evaluation error"]++;
      continue;
    }
    out.accepted.emplace_back(draw - 1, pt);
  }
  out.draws = draw;
  if (static_cast<int>(out.accepted.size()) < cfg.points) {
    std::string worst = "none";
    int cnt = -1;
    for (const auto& [k, v] : out.rejected)
      if (v > cnt) {
        cnt = v;
        worst = k;
      }
    throw SamplingFailure(worst);
  }
  return out;
}

VerificationReport run_suite(const SuiteConfig& cfg, const ConventionSet& conv) {
  if (cfg.points < 1) throw InvalidArgument("points must be >= 1");
  if (cfg.jet_order < 4) throw InvalidArgument("jet_order must be >= 4");
  auto t0 = std::chrono::steady_clock::now();
  FamilyModel m = build_family(cfg.family);
  VerificationReport rep;
  rep.family = m.spec.id;
  rep.claim = m.info->claim;
  rep.chart = chart_name(m.chart);
  rep.parameters = m.spec.text;
  rep.invocation = cfg.invocation;
  rep.seed = cfg.seed;
  rep.points = cfg.points;
  rep.tol = cfg.tol;
  rep.real_slice = cfg.real_slice;
  rep.fingerprint = conv.fingerprint();
  rep.conventions = conv.describe();
  rep.expected_algebra = m.expected_algebra;
  for (const auto& g : m.generators) rep.generators.push_back(g.name);

  Sample smp = sample_points(m, cfg);
  rep.draws = smp.draws;
  rep.rejected = smp.rejected;
  const auto& accepted = smp.accepted;

  rep.records.resize(accepted.size());
  int nthreads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  nthreads = std::min<int>(nthreads, static_cast<int>(accepted.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < accepted.size();)
      rep.records[i] = evaluate_point(m, conv, cfg, accepted[i].first, accepted[i].second);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Algebra from the first three points.
  std::vector<JetPoint> apts;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, accepted.size()); ++i) apts.push_back(accepted[i].second);
  std::string algebra_error;
  try {
    rep.algebra = algebra_identify(m, m.generators, apts, 1e-8).name;
  } catch (const Error& e) {
    rep.algebra = "error";
    algebra_error = e.what();
  }

  // Claims
  ClaimBuilder cb{rep.claims};
  std::string errors;
  for (const auto& r : rep.records)
    if (!r.error.empty()) errors += "point " + std::to_string(r.draw) + ": " + r.error + "; ";
  if (!errors.empty()) cb.add_flag("evaluation", "FAIL", errors);
  auto worst = [&](auto f) {
    double w = 0;
    for (const auto& r : rep.records)
      if (r.error.empty()) w = std::max(w, static_cast<double>(f(r)));
    return w;
  };
  cb.add("einstein", worst([](const PointRecord& r) { return std::max(r.r_err, r.cab_rel); }), cfg.tol.einstein,
         "|R + 4 Lambda| and traceless Ricci relative to the Riemann scale");
  {
    double e = worst([](const PointRecord& r) { return r.sd_err; });
    bool all_d = std::all_of(rep.records.begin(), rep.records.end(),
                             [](const PointRecord& r) { return !r.error.empty() || r.sd_type == "D"; });
    ClaimResult c{"sd_type", e <= cfg.tol.residual && all_d ? "PASS" : "FAIL",
                  all_d ? "C = (0,0,-2 mu0 x^3,0,0), type D" : "SD type differs from D", e, cfg.tol.residual};
    rep.claims.push_back(c);
  }
  const FamilyInfo& info = *m.info;
  {
    std::string expected = info.expected_asd;
    std::string verdict = "PASS", detail;
    std::map<std::string, int> seen;
    for (const auto& r : rep.records) {
      if (!r.error.empty()) continue;
      std::string key = r.asd_type + (m.ed ? "/" + r.table1 : "");
      seen[key]++;
      if (r.asd_type.rfind("AMBIGUOUS", 0) == 0) {
        if (verdict == "PASS") verdict = "AMBIGUOUS";
        continue;
      }
      bool ok = (!m.ed || r.asd_type == r.table1) && (expected.empty() || r.asd_type == expected);
      if (!ok) verdict = "FAIL";
    }
    for (const auto& [k, v] : seen) detail += k + " x" + std::to_string(v) + " ";
    detail += expected.empty() ? "(no fixed type)" : "(expected " + expected + ")";
    rep.claims.push_back({"asd_type", verdict, detail, 0, 0});
  }
  if (info.pseudo)
    cb.add("asd_vanishes", worst([](const PointRecord& r) { return r.cdot_max; }), cfg.tol.nonexistence,
           "all five ASD coefficients");
  if (m.ed) {
    cb.add("cdot_formula", worst([](const PointRecord& r) { return r.cdot_formula; }), cfg.tol.residual,
           "ASD coefficients against the (E, D) formulas");
    cb.add("reduced_equations", worst([](const PointRecord& r) { return r.reduced; }), cfg.tol.residual);
    cb.add("null_strings", worst([](const PointRecord& r) { return r.nullstring; }), cfg.tol.residual,
           "z = -y/x: r_a, r_b, M1, M2");
    std::string verdict = "PASS";
    std::map<std::string, int> seen;
    for (const auto& r : rep.records) {
      if (!r.error.empty()) continue;
      seen[r.optics]++;
      if (!info.expected_optics.empty() && r.optics != info.expected_optics) verdict = "FAIL";
    }
    std::string detail;
    for (const auto& [k, v] : seen) detail += k + " x" + std::to_string(v) + " ";
    if (!info.expected_optics.empty()) detail += "(expected " + info.expected_optics + ")";
    rep.claims.push_back({"optics", verdict, detail, 0, 0});
  }
  cb.add("middle_triplet", worst([](const PointRecord& r) { return r.middle; }), cfg.tol.structural);
  if (m.key) cb.add("hh_equation", worst([](const PointRecord& r) { return r.hh; }), cfg.tol.residual);
  {
    std::map<std::string, double> lowest;
    for (const auto& r : rep.records)
      for (const auto& c : r.conditions) {
        auto it = lowest.find(c.name);
        if (it == lowest.end() || c.magnitude < it->second) lowest[c.name] = c.magnitude;
      }
    for (const auto& [n, v] : lowest)
      rep.claims.push_back({"open_condition " + n, v > cfg.tol.nonvanish ? "PASS" : "FAIL",
                            "smallest magnitude " + num(v), v, cfg.tol.nonvanish, true});
  }
  {
    std::map<std::string, double> w;
    for (const auto& r : rep.records)
      for (const auto& [n, v] : r.identities) w[n] = std::max(w[n], v);
    for (const auto& [n, v] : w) cb.add("identity " + n, v, n == "liouville" ? cfg.tol.structural : cfg.tol.residual);
  }
  for (std::size_t g = 0; g < m.generators.size(); ++g) {
    double k = worst([&](const PointRecord& r) { return r.killing.size() > g ? r.killing[g] : 0.0; });
    double ms = worst([&](const PointRecord& r) { return r.master.size() > g ? r.master[g] : 0.0; });
    const auto& gen = m.generators[g];
    std::string kind = gen.chi0 == cplx(0.0) ? "Killing" : "homothety chi0=" + num(gen.chi0.real());
    if (gen.chi0 != cplx(0.0) && std::abs(m.lambda * gen.chi0) > 0) {
      rep.claims.push_back({"symmetry " + gen.name, "FAIL", "Lambda chi0 != 0", 0, 0});
      continue;
    }
    cb.add("symmetry " + gen.name, std::max(k, ms), cfg.tol.residual, kind + "; Killing equation and reduced system");
  }
  if (!algebra_error.empty()) {
    cb.add_flag("algebra", "FAIL", algebra_error);
  } else {
    bool ok = m.expected_algebra.empty() || rep.algebra == m.expected_algebra;
    rep.claims.push_back({"algebra", ok ? "PASS" : "FAIL",
                          rep.algebra + (m.expected_algebra.empty() ? "" : " (expected " + m.expected_algebra + ")"), 0, 0});
  }
  if (is_type_ii(m.spec.id)) {
    double lo = 1e300;
    for (const auto& r : rep.records)
      if (r.error.empty() && r.obstruction >= 0) lo = std::min(lo, r.obstruction);
    if (lo == 1e300) lo = 0;
    rep.claims.push_back({"no_second_symmetry", lo > cfg.tol.obstruction ? "PASS" : "FAIL",
                          "smallest relative misfit of a q-translation symmetry " + num(lo), lo, cfg.tol.obstruction, true});
  }
  if (cfg.real_slice) {
    double im = worst([](const PointRecord& r) { return r.imag_rel; });
    bool sig = std::all_of(rep.records.begin(), rep.records.end(),
                           [](const PointRecord& r) { return !r.error.empty() || r.signature == "(+,+,-,-)"; });
    rep.claims.push_back({"real_slice", im <= 1e-12 && sig ? "PASS" : "FAIL",
                          sig ? "signature (+,+,-,-)" : "signature differs from (+,+,-,-)", im, 1e-12});
  }

  bool fail = false, amb = false;
  for (const auto& c : rep.claims) {
    fail |= c.verdict == "FAIL";
    amb |= c.verdict == "AMBIGUOUS";
  }
  rep.verdict = fail ? "FAIL" : amb ? "AMBIGUOUS" : info.pseudo ? "NONEXISTENT-AS-CLAIMED" : "PASS";
  rep.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<FamilySpec> table2_specs() {
  std::vector<FamilySpec> s;
  for (const char* id : {"typeII-pppp", "typeII-ppmm", "typeD-pppp", "typeD-ppmm", "typeIII-pppp", "typeIII-ppmm",
                         "typeN-pppp", "typeN-2d"})
    s.push_back(make_family(id));
  s.push_back(make_family(nonexistence_family().id));
  return s;
}

std::vector<VerificationReport> run_all(std::uint64_t seed, const ConventionSet& conv, int points,
                                        const Tolerances& tol) {
  std::vector<VerificationReport> out;
  for (const auto& spec : table2_specs()) {
    SuiteConfig cfg;
    cfg.family = spec;
    cfg.seed = seed;
    cfg.points = points;
    cfg.tol = tol;
    out.push_back(run_suite(cfg, conv));
  }
  return out;
}

// ---- serialization ----

namespace {

ojson cj(cplx v) { return ojson::array({v.real(), v.imag()}); }

ojson to_ojson(const VerificationReport& r, bool timing) {
  ojson j;
  j["schema"] = "phever.report/1";
  j["family"] = r.family;
  j["claim"] = r.claim;
  j["chart"] = r.chart;
  j["parameters"] = r.parameters;
  j["invocation"] = r.invocation;
  j["seed"] = r.seed;
  j["points"] = r.points;
  j["draws"] = r.draws;
  j["rejected"] = r.rejected;
  j["tolerances"] = {{"einstein", r.tol.einstein},   {"structural", r.tol.structural},
                     {"classify", r.tol.classify},   {"nonvanish", r.tol.nonvanish},
                     {"residual", r.tol.residual},   {"nonexistence", r.tol.nonexistence},
                     {"obstruction", r.tol.obstruction}};
  j["real_slice"] = r.real_slice;
  j["calibration"] = {{"fingerprint", r.fingerprint}, {"conventions", r.conventions}};
  ojson recs = ojson::array();
  for (const auto& p : r.records) {
    ojson o;
    o["draw"] = p.draw;
    ojson pt = ojson::array(), q = ojson::array();
    for (int i = 0; i < 4; ++i) {
      pt.push_back(cj(p.point.coords[i]));
      q.push_back(cj(p.qpxy.coords[i]));
    }
    o["point"] = pt;
    o["qpxy"] = q;
    if (!p.error.empty()) {
      o["error"] = p.error;
      recs.push_back(o);
      continue;
    }
    o["ricci_scalar_error"] = p.r_err;
    o["traceless_ricci"] = p.cab_rel;
    o["sd_error"] = p.sd_err;
    o["sd_type"] = p.sd_type;
    o["asd_type"] = p.asd_type;
    if (!p.table1.empty()) o["table1_type"] = p.table1;
    ojson cd = ojson::array();
    for (auto c : p.cdot) cd.push_back(cj(c));
    o["cdot"] = cd;
    o["cdot_formula"] = p.cdot_formula;
    o["reduced"] = p.reduced;
    o["middle_triplet"] = p.middle;
    if (!p.optics.empty()) {
      o["nullstring"] = p.nullstring;
      o["optics"] = p.optics;
    }
    o["hh"] = p.hh;
    ojson cond = ojson::object();
    for (const auto& c : p.conditions) cond[c.name] = c.magnitude;
    o["open_conditions"] = cond;
    ojson ids = ojson::object();
    for (const auto& [n, v] : p.identities) ids[n] = v;
    o["identities"] = ids;
    o["killing"] = p.killing;
    o["master"] = p.master;
    if (p.obstruction >= 0) o["obstruction"] = p.obstruction;
    if (r.real_slice) {
      o["imag_rel"] = p.imag_rel;
      o["signature"] = p.signature;
    }
    recs.push_back(o);
  }
  j["records"] = recs;
  j["symmetry"] = {{"generators", r.generators}, {"algebra", r.algebra}, {"expected_algebra", r.expected_algebra}};
  ojson claims = ojson::array();
  for (const auto& c : r.claims)
    claims.push_back({{"name", c.name}, {"verdict", c.verdict}, {"worst", c.worst}, {"tolerance", c.tolerance},
                      {"bound", c.lower_bound ? "min" : "max"}, {"detail", c.detail}});
  j["claims"] = claims;
  j["verdict"] = r.verdict;
  if (timing) j["wall_clock_s"] = r.wall_clock_s;
  return j;
}

}  // namespace

std::string report_json(const VerificationReport& r, bool include_timing) {
  return to_ojson(r, include_timing).dump(2) + "\n";
}

std::string reports_json(const std::vector<VerificationReport>& rs, bool include_timing) {
  ojson a = ojson::array();
  for (const auto& r : rs) a.push_back(to_ojson(r, include_timing));
  ojson j;
  j["schema"] = "phever.reports/1";
  j["reports"] = a;
  return j.dump(2) + "\n";
}

std::string report_csv(const VerificationReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "family,draw,q_re,q_im,p_re,p_im,x_re,x_im,s_re,s_im,ricci_scalar_error,traceless_ricci,sd_error,sd_type,"
        "asd_type,table1_type,cdot_formula,reduced,middle_triplet,nullstring,optics,killing_max,error\n";
  for (const auto& p : r.records) {
    os << r.family << ',' << p.draw;
    for (auto c : p.point.coords) os << ',' << c.real() << ',' << c.imag();
    double k = 0;
    for (double v : p.killing) k = std::max(k, v);
    os << ',' << p.r_err << ',' << p.cab_rel << ',' << p.sd_err << ',' << p.sd_type << ',' << p.asd_type << ','
       << p.table1 << ',' << p.cdot_formula << ',' << p.reduced << ',' << p.middle << ',' << p.nullstring << ",\""
       << p.optics << "\"," << k << ",\"" << p.error << "\"\n";
  }
  return os.str();
}

std::string summary_line(const VerificationReport& r) {
  std::map<std::string, int> asd, optics;
  for (const auto& p : r.records) {
    asd[p.asd_type]++;
    if (!p.optics.empty()) optics[p.optics]++;
  }
  auto keys = [](const std::map<std::string, int>& m) {
    std::string s;
    for (const auto& [k, v] : m) s += (s.empty() ? "" : "|") + k;
    return s.empty() ? "-" : s;
  };
  std::ostringstream os;
  os << r.family << "  " << r.claim << "  ASD " << keys(asd) << "  optics " << keys(optics) << "  algebra "
     << r.algebra << "  -> " << r.verdict;
  return os.str();
}

}  // namespace phever

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "phever/verify.hpp"

using namespace phever;

namespace {

enum Exit { kOk = 0, kFail = 1, kUsage = 2, kAmbiguous = 3 };

struct Common {
  std::string family, config, calibration, out, format = "json", point;
  std::vector<std::string> sets;
  int points = 20, jet_order = 4;
  std::uint64_t seed = 42;
  double tol_einstein = 0, tol_classify = 0;
  bool real_slice = false, timing = false;
};

std::vector<std::pair<std::string, std::string>> parse_sets(const std::vector<std::string>& sets) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("--set expects name=expression, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

JetPoint parse_point(const std::string& text, const FamilyModel& m) {
  Chart chart = m.chart;
  JetPoint pt;
  pt.chart = chart;
  std::stringstream ss(text);
  std::string item;
  int n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == 4) throw InvalidArgument("--point expects four comma-separated values");
    Expr e = Expr::parse(item, {"w"});
    if (e.depends_on(0)) throw InvalidArgument("--point values must be constants, got '" + item + "'");
    pt.coords[n++] = e.eval(cplx(0.0));
  }
  if (n != 4) throw InvalidArgument("--point expects four comma-separated values");
  m.admit(pt);
  return pt;
}

ConventionSet conventions(const Common& c) {
  return load_calibration(c.calibration.empty() ? default_calibration_path() : c.calibration);
}

// Every option given on the command line, for the report.
std::map<std::string, std::string> invocation(const CLI::App& root, const CLI::App& sub) {
  std::map<std::string, std::string> inv;
  inv["subcommand"] = sub.get_name();
  for (const CLI::App* app : {&root, &sub})
    for (const CLI::Option* o : app->get_options()) {
      if (o->count() == 0 || o->get_name() == "--help") continue;
      std::string v;
      for (const auto& r : o->results()) v += (v.empty() ? "" : ";") + r;
      inv[o->get_name()] = o->get_type_size() == 0 ? "true" : v;
    }
  return inv;
}

void write_out(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + path);
  f << text;
}

int verdict_code(const std::string& v) {
  if (v == "PASS" || v == "NONEXISTENT-AS-CLAIMED") return kOk;
  if (v == "AMBIGUOUS") return kAmbiguous;
  return kFail;
}

void print_claims(const VerificationReport& r) {
  for (const auto& c : r.claims) {
    std::printf("  %-28s %-10s", c.name.c_str(), c.verdict.c_str());
    if (c.tolerance > 0)
      std::printf(c.lower_bound ? " min %.3g (> %.0e)" : " worst %.3g (tol %.0e)", c.worst, c.tolerance);
    if (!c.detail.empty() && c.verdict != "PASS") std::printf("  %s", c.detail.c_str());
    std::printf("\n");
  }
}

SuiteConfig suite_config(const Common& c, const CLI::App& root, const CLI::App& sub) {
  SuiteConfig cfg;
  if (!c.config.empty()) {
    cfg = load_config(c.config);
  } else {
    if (c.family.empty()) throw InvalidArgument("--family or --config is required");
    cfg.family = make_family(c.family, parse_sets(c.sets));
  }
  if (sub.count("--points")) cfg.points = c.points;
  if (sub.count("--seed")) cfg.seed = c.seed;
  if (sub.count("--jet-order")) cfg.jet_order = c.jet_order;
  if (sub.count("--tol-einstein")) cfg.tol.einstein = c.tol_einstein;
  if (sub.count("--tol-classify")) cfg.tol.classify = c.tol_classify;
  if (c.real_slice) cfg.real_slice = true;
  if (cfg.points < 1) throw InvalidArgument("--points must be >= 1");
  if (!(cfg.tol.einstein > 0) || !(cfg.tol.classify > 0)) throw InvalidArgument("tolerances must be positive");
  cfg.invocation = invocation(root, sub);
  return cfg;
}

int cmd_list() {
  for (const auto& f : catalog()) std::printf("%-18s %-48s %s\n", f.id.c_str(), f.claim.c_str(), f.signature().c_str());
  return kOk;
}

int cmd_calibrate(const Common& c) {
  CalibrationOutcome out = calibrate();
  std::printf("%d candidates, survivor: %s\n", out.candidates, out.chosen.describe().c_str());
  std::string path = c.calibration.empty() ? default_calibration_path() : c.calibration;
  save_calibration(out.chosen, path);
  std::printf("fingerprint %s written to %s\n", out.chosen.fingerprint().c_str(), path.c_str());
  return kOk;
}

int cmd_verify(const Common& c, const CLI::App& root, const CLI::App& sub) {
  SuiteConfig cfg = suite_config(c, root, sub);
  VerificationReport r = run_suite(cfg, conventions(c));
  std::printf("%s\n", summary_line(r).c_str());
  print_claims(r);
  if (!c.out.empty()) write_out(c.out, c.format == "csv" ? report_csv(r) : report_json(r, c.timing));
  return verdict_code(r.verdict);
}

int cmd_verify_all(const Common& c, const CLI::App& root, const CLI::App& sub) {
  Tolerances tol;
  if (sub.count("--tol-einstein")) tol.einstein = c.tol_einstein;
  if (sub.count("--tol-classify")) tol.classify = c.tol_classify;
  if (c.points < 1) throw InvalidArgument("--points must be >= 1");
  auto rs = run_all(c.seed, conventions(c), c.points, tol);
  auto inv = invocation(root, sub);
  int code = kOk;
  for (auto& r : rs) {
    r.invocation = inv;
    std::printf("%s\n", summary_line(r).c_str());
    for (const auto& cl : r.claims)
      if (cl.verdict != "PASS") std::printf("    %s: %s %s\n", cl.name.c_str(), cl.verdict.c_str(), cl.detail.c_str());
    int k = verdict_code(r.verdict);
    if (k == kFail || (k == kAmbiguous && code == kOk)) code = k;
  }
  if (!c.out.empty()) {
    if (c.format == "csv") {
      std::string all;
      for (std::size_t i = 0; i < rs.size(); ++i) {
        std::string t = report_csv(rs[i]);
        all += i == 0 ? t : t.substr(t.find('\n') + 1);
      }
      write_out(c.out, all);
    } else {
      write_out(c.out, reports_json(rs, c.timing));
    }
  }
  return code;
}

FamilyModel model_from(const Common& c) {
  if (c.family.empty()) throw InvalidArgument("--family is required");
  return build_family(make_family(c.family, parse_sets(c.sets)));
}

int cmd_classify(const Common& c) {
  FamilyModel m = model_from(c);
  if (c.point.empty()) throw InvalidArgument("--point is required");
  JetPoint pt = parse_point(c.point, m);
  WeylData w = weyl_coefficients(m.metric, conventions(c), pt);
  double tol = c.tol_classify > 0 ? c.tol_classify : Tolerances{}.classify;
  int code = kOk;
  auto type = [&](const std::array<cplx, 5>& k) -> std::string {
    try {
      return petrov_from_coefficients(k, tol).type;
    } catch (const AmbiguousClassification& e) {
      code = kAmbiguous;
      return "AMBIGUOUS(" + e.first + "|" + e.second + ")";
    }
  };
  std::string sd = type(w.C), asd = type(w.Cdot);
  std::printf("SD: %s, ASD: %s\n", sd.c_str(), asd.c_str());
  if (m.ed) std::printf("E,D criteria: %s\n", table1_type(m.ed(pt, 4), m.lambda, Tolerances{}.nonvanish).type.c_str());
  return code;
}

int cmd_optics(const Common& c) {
  FamilyModel m = model_from(c);
  if (c.point.empty()) throw InvalidArgument("--point is required");
  if (!m.ed) throw InvalidArgument("optics needs a family given by (E, D_z)");
  CongruenceReport o = congruence_optics(m, parse_point(c.point, m));
  auto pr = [](const char* n, cplx v) { std::printf("  %-7s %.12g%+.12gi\n", n, v.real(), v.imag()); };
  std::printf("%s\n", o.symbol().c_str());
  pr("theta1", o.theta1);
  pr("rho1", o.rho1);
  pr("theta3", o.theta3);
  pr("rho3", o.rho3);
  if (m.type_d_optics) {
    pr("theta2", o.theta2);
    pr("theta4", o.theta4);
  }
  return kOk;
}

int cmd_symmetries(const Common& c, const CLI::App& sub) {
  FamilyModel m = model_from(c);
  std::vector<JetPoint> pts;
  if (!c.point.empty()) {
    pts.push_back(parse_point(c.point, m));
  } else {
    SuiteConfig cfg;
    cfg.family = m.spec;
    cfg.points = 3;
    if (sub.count("--seed")) cfg.seed = c.seed;
    for (const auto& [d, p] : sample_points(m, cfg).accepted) pts.push_back(p);
  }
  double worst = 0;
  for (const auto& g : m.generators) {
    double k = 0;
    for (const auto& p : pts) k = std::max(k, killing_residual(m, g, p).rel());
    worst = std::max(worst, k);
    std::printf("%-4s chi0=%g  killing residual %.3g\n", g.name.c_str(), std::abs(g.chi0), k);
  }
  AlgebraReport a = algebra_identify(m, m.generators, pts);
  std::printf("algebra %s (expected %s, fit residual %.3g)\n", a.name.c_str(), m.expected_algebra.c_str(),
              a.fit_residual);
  return worst <= Tolerances{}.residual && a.name == m.expected_algebra ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phever: numerical verification of para-Hermite Einstein families"};
  app.require_subcommand(1);
  Common c;

  auto add_family = [&](CLI::App* s) {
    s->add_option("--family", c.family, "family id (see list-families)");
    s->add_option("--set", c.sets, "parameter as name=expression (repeatable)");
    s->add_option("--calibration", c.calibration, "calibration file");
  };
  auto add_run = [&](CLI::App* s) {
    s->add_option("--points", c.points, "number of sample points");
    s->add_option("--seed", c.seed, "random seed");
    s->add_option("--tol-einstein", c.tol_einstein, "Einstein tolerance");
    s->add_option("--tol-classify", c.tol_classify, "classification tolerance");
    s->add_option("--out", c.out, "report path");
    s->add_option("--format", c.format, "report format")->check(CLI::IsMember({"json", "csv"}));
    s->add_option("--calibration", c.calibration, "calibration file");
    s->add_flag("--timing", c.timing, "include wall-clock time in JSON reports");
  };

  app.add_subcommand("list-families", "list the family catalog");
  auto* cal = app.add_subcommand("calibrate", "derive curvature conventions and write the calibration file");
  cal->add_option("--calibration", c.calibration, "output path");

  auto* ver = app.add_subcommand("verify", "run the verification suite of one family");
  ver->add_option("--family", c.family, "family id (see list-families)");
  ver->add_option("--set", c.sets, "parameter as name=expression (repeatable)");
  ver->add_option("--config", c.config, "JSON suite file")->excludes("--family")->excludes("--set");
  ver->add_option("--jet-order", c.jet_order, "order of the (E, D_z) jets");
  ver->add_flag("--real-slice", c.real_slice, "real points and real-metric check");
  add_run(ver);

  auto* all = app.add_subcommand("verify-all", "run every claimed row and the nonexistence row");
  add_run(all);

  auto* cls = app.add_subcommand("classify", "Petrov types at one point");
  add_family(cls);
  cls->add_option("--point", c.point, "chart coordinates q,p,x,s");
  cls->add_option("--tol-classify", c.tol_classify, "classification tolerance");

  auto* opt = app.add_subcommand("optics", "congruence optics at one point");
  add_family(opt);
  opt->add_option("--point", c.point, "chart coordinates q,p,x,s");

  auto* sym = app.add_subcommand("symmetries", "Killing residuals and algebra of the listed generators");
  add_family(sym);
  sym->add_option("--point", c.point, "chart coordinates q,p,x,s");
  sym->add_option("--seed", c.seed, "seed for sample points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "list-families") return cmd_list();
    if (name == "calibrate") return cmd_calibrate(c);
    if (name == "verify") return cmd_verify(c, app, *sub);
    if (name == "verify-all") return cmd_verify_all(c, app, *sub);
    if (name == "classify") return cmd_classify(c);
    if (name == "optics") return cmd_optics(c);
    if (name == "symmetries") return cmd_symmetries(c, *sub);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const SamplingFailure& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kFail;
  } catch (const CalibrationAmbiguous& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kFail;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}

#pragma once

// The verification suite: one CheckReport per (check, case, C), run on a
// small worker pool and returned sorted by id for deterministic output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cottonkit/catalog.hpp"
#include "cottonkit/geometry.hpp"
#include "cottonkit/io.hpp"
#include "cottonkit/kink.hpp"
#include "cottonkit/lattice.hpp"
#include "cottonkit/reduction.hpp"
#include "cottonkit/report.hpp"
#include "cottonkit/symmetry.hpp"

namespace cottonkit {

struct CheckInfo {
  std::string id;
  double tolerance;
  bool by_default;    // part of the default suite
  bool scales_with_tol;  // --tol overrides the tolerance
};

inline const std::vector<CheckInfo>& check_catalog() {
  static const std::vector<CheckInfo> all{
      {"cotton", 1e-8, true, true},
      {"cotton-identities", 1e-8, true, true},
      {"curvature", 1e-9, true, true},
      {"eom", 1e-9, true, true},
      {"first-integral", 1e-9, true, true},
      {"kink-shooting", 1e-6, true, true},
      {"kk-relation", 1e-9, true, true},
      {"killing", 1e-9, true, true},
      {"killing-dim", 0.0, true, false},
      {"lattice-2d", 0.3, false, false},
      {"lattice-cotton", 0.3, false, false},
      {"lift-curvature", 1e-8, true, true},
      {"lift-eom", 1e-8, true, true},
      {"max-symmetry", 1e-9, true, true},
      {"transform", 1e-9, true, true},
  };
  return all;
}

inline const CheckInfo& check_info(const std::string& id) {
  for (const auto& c : check_catalog())
    if (c.id == id) return c;
  throw ConfigError("unknown check '" + id + "'");
}

/// Expands a selection: "lift" names both lift checks, "lattice" both lattice
/// checks, "all" everything including the lattice checks.
inline std::vector<std::string> expand_checks(const std::vector<std::string>& names) {
  std::set<std::string> out;
  if (names.empty())
    for (const auto& c : check_catalog())
      if (c.by_default) out.insert(c.id);
  for (const auto& n : names) {
    if (n == "all") {
      for (const auto& c : check_catalog()) out.insert(c.id);
    } else if (n == "lift") {
      out.insert({"lift-eom", "lift-curvature"});
    } else if (n == "lattice") {
      out.insert({"lattice-2d", "lattice-cotton"});
    } else if (n == "kink") {
      out.insert("kink-shooting");
    } else {
      out.insert(check_info(n).id);
    }
  }
  return {out.begin(), out.end()};
}

inline double tolerance_for(const RunConfig& cfg, const std::string& id) {
  if (auto it = cfg.tolerances.find(id); it != cfg.tolerances.end()) return it->second;
  const CheckInfo& info = check_info(id);
  if (info.scales_with_tol)
    if (auto it = cfg.tolerances.find("*"); it != cfg.tolerances.end()) return it->second;
  return info.tolerance;
}

/// Case B carries C < 0; the other cases use |C|.
inline SolutionCase case_for(CaseTag t, double C) { return {t, t == CaseTag::B ? -std::fabs(C) : std::fabs(C)}; }

inline std::vector<CaseTag> all_cases() {
  return {CaseTag::A, CaseTag::B, CaseTag::Cplus, CaseTag::Cminus, CaseTag::KinkPlus, CaseTag::KinkMinus};
}

namespace detail {

inline Grid grid_for(const RunConfig& cfg, const SolutionCase& sc, GridKind kind) {
  const char* key = kind == GridKind::Fields2D ? "2d" : "3d";
  if (auto it = cfg.grids.find(key); it != cfg.grids.end())
    return Grid::parse(it->second, kind == GridKind::Fields2D ? std::vector<std::string>{"t", "x"}
                                                              : std::vector<std::string>{"t", "x", "y"});
  return standard_grid(sc, kind);
}

inline CheckReport start(const std::string& id, const SolutionCase& sc, double tol, const Grid& g) {
  CheckReport r;
  r.id = id;
  r.case_tag = to_string(sc.tag);
  r.params = sc.env();
  r.tolerance = tol;
  r.grid = g.describe();
  return r;
}

inline CheckReport check_curvature(const RunConfig& cfg, const SolutionCase& sc, double tol) {
  const Grid g2 = grid_for(cfg, sc, GridKind::Fields2D), g3 = grid_for(cfg, sc, GridKind::Fields3D);
  CheckReport rep = start("curvature", sc, tol, g3);
  rep.grid = g2.describe() + ";" + g3.describe();
  const Solution2D s2 = solution_2d(sc);
  const Solution3D s3 = solution_3d(sc);
  ResidualMax all, r2, r3;
  for (const auto& p : g2.points()) {
    const Curvature cv = curvature(s2.rd.g2.evaluate(p, 2));
    const double d = (cv.scalar.value() - eval_real(s2.r, p, s2.rd.g2.coordinates(), sc.env())) / curvature_scale(cv);
    all.add(p, d, cv.scalar.value());
    r2.add(p, d);
  }
  for (const auto& p : g3.points()) {
    const Curvature cv = curvature(s3.metric.evaluate(p, 2));
    const double d = (cv.scalar.value() - eval_real(s3.R, p, s3.metric.coordinates(), sc.env())) / curvature_scale(cv);
    all.add(p, d, cv.scalar.value());
    r3.add(p, d);
  }
  rep.details["r2d"] = r2.max();
  rep.details["R3d"] = r3.max();
  all.fill(rep);
  return rep;
}

inline CheckReport check_cotton(const RunConfig& cfg, const SolutionCase& sc, double tol) {
  const Grid g = grid_for(cfg, sc, GridKind::Fields3D);
  CheckReport rep = start("cotton", sc, tol, g);
  const MetricSpec m = solution_3d(sc).metric;
  ResidualMax acc;
  for (const auto& p : g.points()) {
    const CottonAt c = cotton_at(m, p);
    acc.add(p, c.max_abs() / c.scale, c.max_abs());
  }
  acc.fill(rep);
  return rep;
}

inline CheckReport check_cotton_identities(const RunConfig& cfg, const SolutionCase& sc, double tol) {
  const Grid g = grid_for(cfg, sc, GridKind::Fields3D);
  CheckReport rep = start("cotton-identities", sc, tol, g);
  const MetricSpec m = solution_3d(sc).metric;
  ResidualMax acc, tr, sy, dv, ef;
  for (const auto& p : g.points()) {
    const CottonIdentities c = cotton_identities_at(m, p);
    const double worst = std::max({c.trace, c.asymmetry, c.divergence, c.einstein_form}) / c.scale;
    acc.add(p, worst);
    tr.add(p, c.trace / c.scale);
    sy.add(p, c.asymmetry / c.scale);
    dv.add(p, c.divergence / c.scale);
    ef.add(p, c.einstein_form / c.scale);
  }
  rep.details["trace"] = tr.max();
  rep.details["asymmetry"] = sy.max();
  rep.details["divergence"] = dv.max();
  rep.details["einstein_form"] = ef.max();
  acc.fill(rep);
  return rep;
}

inline CheckReport check_eom(const RunConfig& cfg, const SolutionCase& sc, double tol) {
  const Grid g = grid_for(cfg, sc, GridKind::Fields2D);
  CheckReport rep = start("eom", sc, tol, g);
  const Solution2D s = solution_2d(sc);
  ResidualMax acc, e11, e12, e14, e15;
  for (const auto& p : g.points()) {
    const FieldEqResiduals r = eom_residuals(s.rd, p);
    const double worst = std::max({r.eq11, r.eq12_max(), std::fabs(r.eq14), r.eq15_max()}) / r.scale;
    acc.add(p, worst);
    e11.add(p, r.eq11 / r.scale);
    e12.add(p, r.eq12_max() / r.scale);
    e14.add(p, r.eq14 / r.scale);
    e15.add(p, r.eq15_max() / r.scale);
  }
  rep.details["conservation"] = e11.max();
  rep.details["metric_equation"] = e12.max();
  rep.details["trace"] = e14.max();
  rep.details["trace_free"] = e15.max();
  acc.fill(rep);
  return rep;
}

inline CheckReport check_first_integral(const RunConfig& cfg, const SolutionCase& sc, double tol) {
  const Grid g = grid_for(cfg, sc, GridKind::Fields2D);
  CheckReport rep = start("first-integral", sc, tol, g);
  const Solution2D s = solution_2d(sc);
  ResidualMax acc;
  for (const auto& p : g.points()) {
    const FieldEqResiduals r = eom_residuals(s.rd, p);
    acc.add(p, (r.first_integral_value - sc.C) / r.scale, r.first_integral_value);
  }
  acc.fill(rep);
  return rep;
}

inline CheckReport check_kk(const RunConfig& cfg, const SolutionCase& sc, double tol) {
  const Grid g = grid_for(cfg, sc, GridKind::Fields2D);
  CheckReport rep = start("kk-relation", sc, tol, g);
  const Solution2D s = solution_2d(sc);
  const Solution3D s3 = solution_3d(sc);
  ResidualMax acc, vs_catalog;
  for (const auto& p : g.points()) {
    const KkRelation k = kk_relation_at(s.rd, p);
    std::vector<double> p3 = p;
    p3.push_back(0.0);
    const double dR = (k.R3 - eval_real(s3.R, p3, s3.metric.coordinates(), sc.env())) / k.scale;
    acc.add(p, std::max(std::fabs(k.residual / k.scale), std::fabs(dR)), k.R3);
    vs_catalog.add(p, dR);
  }
  rep.details["R3_vs_closed_form"] = vs_catalog.max();
  acc.fill(rep);
  return rep;
}

inline CheckReport check_transform(const RunConfig& cfg, const SolutionCase& sc, double tol) {
  const Grid g = cfg.grids.count("3d") ? grid_for(cfg, sc, GridKind::Fields3D) : standard_grid(sc, GridKind::Transform);
  CheckReport rep = start("transform", sc, tol, g);
  const TransformSpec tr = transform(sc);
  const MetricSpec target = conformal_flat_metric(tr);
  const MetricSpec m = solution_3d(sc).metric;
  rep.message = "domain " + tr.domain;
  ResidualMax acc;
  for (const auto& p : g.points()) {
    if (!tr.in_domain(p)) throw std::domain_error("grid point outside the transform domain " + tr.domain);
    const auto pb = pullback_metric_at(tr.map, tr.source, tr.env, target, p);
    const auto gv = m.evaluate(p, 0).values();
    double scale = 1.0, worst = 0.0;
    for (double v : gv) scale = std::max(scale, std::fabs(v));
    for (std::size_t i = 0; i < gv.size(); ++i) worst = std::max(worst, std::fabs(pb[i] - gv[i]));
    acc.add(p, worst / scale);
  }
  acc.fill(rep);
  return rep;
}

inline CheckReport check_killing(const RunConfig& cfg, const SolutionCase& sc, double tol) {
  const Grid g = grid_for(cfg, sc, GridKind::Fields3D);
  const MetricSpec m = solution_3d(sc).metric;
  const auto fields = to_specs(killing_fields(sc));
  CheckReport rep = killing_residual(m, fields, g, tol);
  rep.case_tag = to_string(sc.tag);
  rep.params = sc.env();
  const auto pts = generic_points(sc);
  rep.details["independent"] = independent_count(m, fields, pts[0]);
  rep.details["closure_defect"] = closure_defect(m, fields, pts);
  if (rep.details["independent"] != expected_killing_dimension(sc.tag)) {
    rep.pass = false;
    rep.message = "fields are not independent";
  } else if (!(rep.details["closure_defect"] < 1e-8)) {
    rep.pass = false;
    rep.message = "fields do not close under the bracket";
  }
  return rep;
}

inline CheckReport check_killing_dim(const SolutionCase& sc, double tol) {
  CheckReport rep = start("killing-dim", sc, tol, Grid{});
  const auto pts = generic_points(sc);
  for (const auto& p : pts) {
    std::string s;
    for (double v : p) s += (s.empty() ? "" : ",") + format_real(v);
    rep.grid += (rep.grid.empty() ? "" : ";") + s;
  }
  const MetricSpec m = solution_3d(sc).metric;
  std::vector<int> per_point;
  const int expected = expected_killing_dimension(sc.tag);
  rep.details["expected"] = expected;
  rep.details["depth"] = 2;
  try {
    const int d = killing_dimension_consensus(m, pts, 2, &per_point);
    rep.details["dimension"] = d;
    rep.max_residual = std::fabs(d - expected);
    rep.worst_point = pts[0];
    rep.worst_value = d;
    rep.finalize();
    if (killing_dimension_consensus(m, pts, 1) != d) rep.message = "estimate changes between depth 1 and 2";
  } catch (const InconsistentEstimate& e) {
    rep.max_residual = std::nan("");
    rep.message = e.what();
    rep.finalize();
  }
  return rep;
}

inline CheckReport check_max_symmetry(const SolutionCase& sc, double tol) {
  CheckReport rep = start("max-symmetry", sc, tol, Grid{});
  const MetricSpec m = solution_3d(sc).metric;
  ResidualMax acc;
  for (const auto& p : generic_points(sc)) {
    const double s = max_symmetry_residual(m, p);
    acc.add(p, s);
    std::string txt;
    for (double v : p) txt += (txt.empty() ? "" : ",") + format_real(v);
    rep.grid += (rep.grid.empty() ? "" : ";") + txt;
  }
  acc.fill(rep);
  return rep;
}

inline constexpr int kShootingPoints = 321;
inline constexpr double kShootingTol = 1e-10;

inline double kink_xmax(double C) { return 8.0 / std::sqrt(C); }

inline CheckReport check_kink_shooting(const SolutionCase& sc, double tol) {
  const double xmax = kink_xmax(sc.C);
  Grid g{{{"x", -xmax, xmax, kShootingPoints}}};
  CheckReport rep = start("kink-shooting", sc, tol, g);
  KinkSolverOptions opt;
  opt.orientation = is_minus(sc.tag) ? -1 : +1;
  const KinkProfile k = solve_kink_ode(sc.C, xmax, kShootingPoints, kShootingTol, opt);
  ResidualMax acc;
  for (std::size_t i = 0; i < k.x.size(); ++i)
    acc.add({k.x[i]}, k.f[i] - opt.orientation * kink_closed_form(sc.C, k.x[i]), k.f[i]);
  rep.details["shooting_parameter"] = k.shooting_parameter;
  rep.details["iterations"] = k.iterations;
  rep.details["constraint_drift"] = k.max_drift;
  rep.details["trace_residual"] = k.max_residual;
  acc.fill(rep);
  return rep;
}

}  // namespace detail

struct LiftTarget {
  std::string tag;
  PotentialSpec potential;
};

inline std::vector<LiftTarget> lift_targets(double C) {
  return {{"phi4", phi4_potential(std::fabs(C))}, {"sine-gordon", sine_gordon_potential()}};
}

/// Kink width 1/sqrt(|V''|) at the centre; the lift grid spans six widths.
inline double lift_width(const PotentialSpec& p) { return 1.0 / std::sqrt(std::fabs(p.d2(kink_center(p)))); }

inline Grid lift_standard_grid(const PotentialSpec& p) { return lift_grid(6.0 * lift_width(p), 41); }

namespace detail {

inline CheckReport check_lift(const LiftTarget& t, bool curvature_form, double tol) {
  const double w = lift_width(t.potential);
  const LiftedKink l = lift_flat_kink(FlatKink(t.potential, 12.0 * w, 1e-13), {-6.0 * w, 0.0, 6.0 * w});
  const Grid g = lift_standard_grid(t.potential);
  CheckReport rep = curvature_form ? lift_curvature_check(l, g, tol) : lift_residuals(l, g, tol);
  rep.case_tag = t.tag;
  return rep;
}

inline CheckReport failed_report(const std::string& id, const std::string& tag, const ParamEnv& params, double tol,
                                 const std::string& why) {
  CheckReport r;
  r.id = id;
  r.case_tag = tag;
  r.params = params;
  r.tolerance = tol;
  r.max_residual = std::nan("");
  r.message = why;
  r.finalize();
  return r;
}

}  // namespace detail

/// A unit of work; returns one report.
struct Task {
  std::string id, tag;
  ParamEnv params;
  double tolerance;
  std::function<CheckReport()> run;
};

inline bool case_selected(const RunConfig& cfg, const std::string& tag) {
  if (cfg.cases.empty()) return true;
  for (const auto& c : cfg.cases) {
    if (c == tag) return true;
    if (tag != "phi4" && tag != "sine-gordon") {
      try {
        if (to_string(parse_case_tag(c)) == tag) return true;
      } catch (const std::invalid_argument&) {
      }
    }
  }
  return false;
}

inline void validate_cases(const RunConfig& cfg) {
  for (const auto& c : cfg.cases) {
    if (c == "phi4" || c == "sine-gordon") continue;
    try {
      parse_case_tag(c);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
}

inline std::vector<Task> plan(const RunConfig& cfg) {
  validate_cases(cfg);
  for (const auto& [k, v] : cfg.tolerances)
    if (k != "*") check_info(k);
  for (const auto& [k, v] : cfg.grids) {
    try {
      Grid::parse(v, k == "2d" ? std::vector<std::string>{"t", "x"} : std::vector<std::string>{"t", "x", "y"});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  const std::vector<std::string> ids = expand_checks(cfg.checks);
  std::vector<Task> tasks;
  const auto want = [&](const char* id) { return std::find(ids.begin(), ids.end(), id) != ids.end(); };
  for (double C : cfg.c_values()) {
    for (CaseTag t : all_cases()) {
      const std::string tag = to_string(t);
      if (!case_selected(cfg, tag)) continue;
      const SolutionCase sc = case_for(t, C);
      const bool symmetric = !is_kink(t);
      auto add = [&](const char* id, std::function<CheckReport(double)> fn) {
        if (!want(id)) return;
        const double tol = tolerance_for(cfg, id);
        tasks.push_back({id, tag, sc.env(), tol, [fn, tol] { return fn(tol); }});
      };
      add("curvature", [cfg, sc](double tol) { return detail::check_curvature(cfg, sc, tol); });
      add("cotton", [cfg, sc](double tol) { return detail::check_cotton(cfg, sc, tol); });
      add("cotton-identities", [cfg, sc](double tol) { return detail::check_cotton_identities(cfg, sc, tol); });
      add("eom", [cfg, sc](double tol) { return detail::check_eom(cfg, sc, tol); });
      add("first-integral", [cfg, sc](double tol) { return detail::check_first_integral(cfg, sc, tol); });
      add("kk-relation", [cfg, sc](double tol) { return detail::check_kk(cfg, sc, tol); });
      add("transform", [cfg, sc](double tol) { return detail::check_transform(cfg, sc, tol); });
      if (symmetric) {
        add("killing", [cfg, sc](double tol) { return detail::check_killing(cfg, sc, tol); });
        add("killing-dim", [sc](double tol) { return detail::check_killing_dim(sc, tol); });
      }
      if (t == CaseTag::Cplus || t == CaseTag::Cminus)
        add("max-symmetry", [sc](double tol) { return detail::check_max_symmetry(sc, tol); });
      if (is_kink(t)) add("kink-shooting", [sc](double tol) { return detail::check_kink_shooting(sc, tol); });
    }
    for (const LiftTarget& lt : lift_targets(C)) {
      if (!case_selected(cfg, lt.tag)) continue;
      // the sine-Gordon potential has no C; run it once
      if (lt.tag == "sine-gordon" && C != cfg.c_values().front()) continue;
      for (const char* id : {"lift-eom", "lift-curvature"}) {
        if (!want(id)) continue;
        const double tol = tolerance_for(cfg, id);
        const bool curv = std::string(id) == "lift-curvature";
        tasks.push_back({id, lt.tag, lt.potential.env, tol, [lt, curv, tol] { return detail::check_lift(lt, curv, tol); }});
      }
    }
  }
  // lattice checks use their own periodic test configurations
  if (want("lattice-2d")) {
    const double tol = tolerance_for(cfg, "lattice-2d");
    tasks.push_back({"lattice-2d", "test-fields", {}, tol, [tol] {
                       LatticeOptions o;
                       o.order_tolerance = tol;
                       CheckReport r = lattice_variation_check_2d(lattice_test_fields_2d(), o);
                       r.case_tag = "test-fields";
                       return r;
                     }});
    tasks.push_back({"lattice-2d", "windowed-kink", {{"C", 1.0}}, tol, [tol] {
                       LatticeOptions o;
                       o.order_tolerance = tol;
                       o.levels = {32, 64, 128};
                       CheckReport r = lattice_variation_check_2d(windowed_kink_fields(1.0), o);
                       r.case_tag = "windowed-kink";
                       return r;
                     }});
  }
  if (want("lattice-cotton")) {
    const double tol = tolerance_for(cfg, "lattice-cotton");
    tasks.push_back({"lattice-cotton", "test-metric", {}, tol, [tol] {
                       LatticeOptions o;
                       o.order_tolerance = tol;
                       o.levels = {16, 32, 64};
                       CheckReport r = lattice_cotton_variation_check_3d(lattice_test_metric_3d(), o);
                       r.case_tag = "test-metric";
                       return r;
                     }});
  }
  return tasks;
}

inline bool report_less(const CheckReport& a, const CheckReport& b) {
  if (a.id != b.id) return a.id < b.id;
  if (a.case_tag != b.case_tag) return a.case_tag < b.case_tag;
  return a.params < b.params;
}

/// Runs every task; a task that throws becomes a failed report.
inline std::vector<CheckReport> run_tasks(const std::vector<Task>& tasks, unsigned threads = 0) {
  std::vector<CheckReport> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      Stopwatch sw;
      try {
        out[i] = t.run();
      } catch (const std::exception& e) {
        out[i] = detail::failed_report(t.id, t.tag, t.params, t.tolerance, e.what());
      }
      out[i].wall_time = sw.seconds();
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::stable_sort(out.begin(), out.end(), report_less);
  return out;
}

inline std::vector<CheckReport> run_suite(const RunConfig& cfg, unsigned threads = 0) {
  return run_tasks(plan(cfg), threads);
}

// ---------------------------------------------------------------------------
// Profiles for plotting

inline std::string shooting_csv(const KinkProfile& k) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < k.x.size(); ++i)
    rows.push_back({k.x[i], k.f[i], k.h[i], k.residual_eq14[i], k.first_integral[i]});
  return csv_table({"x", "f", "h", "residual_eq14", "first_integral"}, rows);
}

struct KinkProfiles {
  std::string geometry_csv;  // x, f, r, R from the closed-form metric
  std::string shooting_csv;  // x, f, h, residual_eq14, first_integral
};

inline KinkProfiles kink_profiles(double C, int n = 161) {
  const SolutionCase sc{CaseTag::KinkPlus, C};
  const Solution2D s = solution_2d(sc);
  const MetricSpec m3 = assemble_3d_metric(s.rd);
  const double xmax = detail::kink_xmax(C);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < n; ++i) {
    const double x = -xmax + 2 * xmax * i / (n - 1);
    const std::vector<double> p{0.0, x}, p3{0.0, x, 0.0};
    const double f = field_strength_f(s.rd, p);
    const double r = curvature(s.rd.g2.evaluate(p, 2)).scalar.value();
    const double R = curvature(m3.evaluate(p3, 2)).scalar.value();
    rows.push_back({x, f, r, R});
  }
  KinkProfiles out;
  out.geometry_csv = csv_table({"x", "f", "r", "R"}, rows);
  out.shooting_csv = shooting_csv(solve_kink_ode(C, xmax, n, detail::kShootingTol));
  return out;
}

}  // namespace cottonkit

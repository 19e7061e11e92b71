// cottonkit command-line interface.
//
// Exit codes: 0 all checks pass, 1 some check failed or a computation broke
// down, 2 bad command line, configuration or input file.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cottonkit/cottonkit.hpp"

namespace ck = cottonkit;

namespace {

struct Globals {
  std::optional<double> C;
  std::optional<double> tol;
  std::string grid;
  std::string format = "json";
  std::string out;
  std::string config;
  bool thorough = false;
  bool stable = false;
};

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ck::ConfigError(std::string("bad number '") + item + "' in " + what);
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_names(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& s : items) {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(item);
  }
  return out;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    ck::write_text_file(path, text);
}

int exit_for(const std::vector<ck::CheckReport>& reports) { return ck::failed_count(reports) == 0 ? 0 : 1; }

ck::RunConfig base_config(const Globals& g) {
  ck::RunConfig cfg = g.config.empty() ? ck::RunConfig{} : ck::config_from_json(ck::read_json_file(g.config));
  if (g.C) cfg.C = *g.C;
  if (!std::isfinite(cfg.C) || cfg.C == 0) throw ck::ConfigError("C must be finite and nonzero");
  if (g.tol) {
    if (!(*g.tol >= 0)) throw ck::ConfigError("--tol must be nonnegative");
    cfg.tolerances["*"] = *g.tol;
  }
  if (!g.grid.empty()) {
    const auto axes = std::count(g.grid.begin(), g.grid.end(), '=');
    if (axes != 2 && axes != 3) throw ck::ConfigError("--grid needs two (t,x) or three (t,x,y) axes");
    cfg.grids[axes == 2 ? "2d" : "3d"] = g.grid;
  }
  if (g.thorough) cfg.thorough = true;
  if (g.stable) cfg.stable_output = true;
  if (!g.out.empty()) cfg.output = g.out;
  if (g.format != "json" || cfg.format.empty()) cfg.format = g.format;
  ck::validate_format(cfg.format);
  return cfg;
}

/// Grid for user metrics without a catalog default: every axis on [0.5, 1.5].
ck::Grid default_grid(const ck::MetricSpec& m) {
  ck::Grid g;
  for (const auto& c : m.coordinates()) g.axes.push_back({c, 0.5, 1.5, 3});
  return g;
}

ck::Grid grid_or_point(const ck::MetricSpec& m, const std::string& grid, const std::string& point) {
  if (!point.empty()) {
    const auto p = parse_numbers(point, "--point");
    if (p.size() != m.coordinates().size()) throw ck::ConfigError("--point needs one value per coordinate");
    ck::Grid g;
    for (std::size_t i = 0; i < p.size(); ++i) g.axes.push_back({m.coordinates()[i], p[i], p[i], 1});
    return g;
  }
  if (grid.empty() || grid == "default") return default_grid(m);
  try {
    return ck::Grid::parse(grid, m.coordinates());
  } catch (const std::invalid_argument& e) {
    throw ck::ConfigError(e.what());
  }
}

ck::MetricSpec load_metric(const std::string& path) { return ck::metric_from_json(ck::read_json_file(path)); }

std::string reports_out(const std::vector<ck::CheckReport>& reports, const std::string& format, bool stable) {
  return ck::format_reports(reports, format, stable);
}

int cmd_verify(const Globals& g, const std::vector<std::string>& cases, const std::vector<std::string>& what) {
  ck::RunConfig cfg = base_config(g);
  if (!cases.empty()) cfg.cases = split_names(cases);
  if (!what.empty()) cfg.checks = split_names(what);
  const auto tasks = ck::plan(cfg);
  if (tasks.empty()) throw ck::ConfigError("the selection matches no checks");
  const auto reports = ck::run_tasks(tasks);
  emit(reports_out(reports, cfg.format, cfg.stable_output), cfg.output);
  return exit_for(reports);
}

int cmd_report(const Globals& g) {
  ck::RunConfig cfg = base_config(g);
  const std::filesystem::path dir = cfg.output.empty() ? std::filesystem::path(".") : std::filesystem::path(cfg.output);
  std::filesystem::create_directories(dir);
  const auto reports = ck::run_suite(cfg);
  ck::write_text_file((dir / "report.json").string(), ck::report_document(reports, cfg.stable_output).dump(2) + "\n");
  for (double C : cfg.c_values()) {
    const ck::KinkProfiles p = ck::kink_profiles(std::fabs(C));
    const std::string tag = ck::format_real(std::fabs(C));
    ck::write_text_file((dir / ("kink_profile_C" + tag + ".csv")).string(), p.geometry_csv);
    ck::write_text_file((dir / ("kink_shooting_C" + tag + ".csv")).string(), p.shooting_csv);
  }
  if (cfg.format != "json") std::cout << reports_out(reports, cfg.format, cfg.stable_output);
  else std::cout << ck::failed_count(reports) << " of " << reports.size() << " checks failed; wrote " << (dir / "report.json").string() << "\n";
  return exit_for(reports);
}

int cmd_solve_kink(const Globals& g, std::optional<double> xmax, int n) {
  const double C = g.C.value_or(1.0);
  const double tol = g.tol.value_or(1e-10);
  if (!(C > 0)) throw ck::ConfigError("solve kink needs C > 0");
  const double xm = xmax.value_or(8.0 / std::sqrt(C));
  ck::KinkProfile k;
  try {
    k = ck::solve_kink_ode(C, xm, n, tol);
  } catch (const std::invalid_argument& e) {
    throw ck::ConfigError(e.what());
  }
  emit(ck::shooting_csv(k), g.out);
  if (!g.out.empty())
    std::cout << "f'(0) = " << ck::format_real(k.shooting_parameter) << " after " << k.iterations
              << " bisections; constraint drift " << ck::format_real(k.max_drift) << "\n";
  return 0;
}

int cmd_lift(const Globals& g, const std::string& potential, const std::string& var, const std::string& vacua,
             double xmax, int n) {
  ck::PotentialSpec p;
  try {
    p.V = ck::parse_expr(potential);
  } catch (const ck::ParseError& e) {
    throw ck::ConfigError(std::string("--potential: ") + e.what());
  }
  p.var = var;
  if (g.C || ck::symbols(p.V).count("C")) p.env["C"] = g.C.value_or(1.0);
  const auto v = parse_numbers(vacua, "--vacua");
  if (v.size() != 2) throw ck::ConfigError("--vacua needs two values a,b");
  p.vacuum_lo = v[0];
  p.vacuum_hi = v[1];
  try {
    ck::validate_symbols(p.V, {p.var}, p.env);
    ck::validate_potential(p);
  } catch (const ck::UnresolvedSymbol& e) {
    throw ck::ConfigError(std::string("--potential: ") + e.what());
  } catch (const ck::InvalidPotential& e) {
    throw ck::ConfigError(e.what());
  }
  const double w = ck::lift_width(p);
  if (!(xmax > 0)) xmax = 6.0 * w;
  if (n < 2) throw ck::ConfigError("--n must be at least 2");
  const ck::LiftedKink l = ck::lift_flat_kink(ck::FlatKink(p, 2.0 * xmax, 1e-13), {-xmax, 0.0, xmax});
  const ck::Grid grid = ck::lift_grid(xmax, n);
  std::vector<std::vector<double>> rows;
  for (const auto& pt : grid.points()) {
    const auto r = ck::lift_residuals_at(l, pt);
    const double f = l.field(pt[1]);
    const double rr = ck::curvature(l.metric_jet(pt, 2)).scalar.value();
    rows.push_back({pt[1], f, l.g_tt(pt[1]), rr, -p.d2(f), r.trace, r.trace_free});
  }
  const double tol = g.tol.value_or(1e-8);
  std::vector<ck::CheckReport> reports{ck::lift_residuals(l, grid, tol), ck::lift_curvature_check(l, grid, tol)};
  for (auto& r : reports) r.case_tag = "user";
  const std::string csv =
      ck::csv_table({"x", "f", "g_tt", "r", "minus_V2", "trace_residual", "trace_free_residual"}, rows);
  if (g.out.empty()) {
    std::cout << csv;
    std::cerr << ck::reports_text(reports, g.stable);
  } else {
    ck::write_text_file(g.out, csv);
    std::cout << reports_out(reports, g.format, g.stable);
  }
  return exit_for(reports);
}

int cmd_cotton(const Globals& g, const std::string& metric, const std::string& point) {
  const ck::MetricSpec m = load_metric(metric);
  if (m.dim() != 3) throw ck::ConfigError("cotton needs a 3-dimensional metric");
  const ck::Grid grid = grid_or_point(m, g.grid, point);
  ck::CheckReport rep;
  rep.id = "cotton";
  rep.params = m.env();
  rep.grid = grid.describe();
  rep.tolerance = g.tol.value_or(1e-8);
  ck::Stopwatch sw;
  ck::ResidualMax acc;
  const auto pts = grid.points();
  for (const auto& p : pts) {
    const ck::CottonAt c = ck::cotton_at(m, p);
    acc.add(p, c.max_abs() / c.scale, c.max_abs());
    if (pts.size() == 1)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) rep.details["C^" + m.coordinates()[a] + m.coordinates()[b]] = c(a, b);
  }
  acc.fill(rep);
  rep.wall_time = sw.seconds();
  emit(reports_out({rep}, g.format, g.stable), "");
  return exit_for({rep});
}

int cmd_killing(const Globals& g, const std::string& metric, const std::string& fields, const std::string& grid_spec) {
  const ck::MetricSpec m = load_metric(metric);
  const ck::FieldSet fs = ck::fields_from_json(ck::read_json_file(fields));
  if (fs.coordinates != m.coordinates()) throw ck::ConfigError("fields and metric use different coordinates");
  for (const auto& [k, v] : fs.env)
    if (!m.env().count(k) || m.env().at(k) != v) throw ck::ConfigError("parameter '" + k + "' differs from the metric");
  const std::string spec = grid_spec.empty() ? g.grid : grid_spec;
  ck::CheckReport rep = ck::killing_residual(m, fs.fields, grid_or_point(m, spec, ""), g.tol.value_or(1e-9));
  emit(reports_out({rep}, g.format, g.stable), g.out);
  return exit_for({rep});
}

int cmd_killing_dim(const Globals& g, const std::string& metric, const std::string& point, int depth) {
  const ck::MetricSpec m = load_metric(metric);
  const auto p = parse_numbers(point, "--point");
  if (p.size() != m.coordinates().size()) throw ck::ConfigError("--point needs one value per coordinate");
  if (depth < 1 || depth > 2) throw ck::ConfigError("--depth must be 1 or 2");
  const int d = ck::killing_dimension_estimate(m, p, depth);
  ck::json j;
  j["schema"] = ck::kSchema;
  j["point"] = p;
  j["depth"] = depth;
  j["dimension"] = d;
  emit(g.format == "text" ? "Killing dimension " + std::to_string(d) + "\n" : j.dump(2) + "\n", g.out);
  return 0;
}

int cmd_export(const Globals& g, const std::string& tag, const std::string& what) {
  ck::SolutionCase sc = ck::case_for(ck::CaseTag::A, 1.0);
  try {
    sc = ck::case_for(ck::parse_case_tag(tag), g.C.value_or(1.0));
  } catch (const std::invalid_argument& e) {
    throw ck::ConfigError(e.what());
  }
  ck::json j;
  if (what == "metric2d") {
    j = ck::reduced_to_json(ck::solution_2d(sc).rd);
  } else if (what == "metric3d") {
    j = ck::metric_to_json(ck::solution_3d(sc).metric);
  } else if (what == "transform") {
    j = ck::transform_to_json(ck::transform(sc));
  } else if (what == "killing") {
    if (ck::is_kink(sc.tag)) throw ck::ConfigError("no Killing fields are catalogued for the kink");
    j = ck::fields_to_json({{"t", "x", "y"}, sc.env(), ck::to_specs(ck::killing_fields(sc))});
  } else {
    throw ck::ConfigError("--what must be metric2d, metric3d, transform or killing");
  }
  emit(j.dump(2) + "\n", g.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification toolkit for three-dimensional Chern-Simons gravity and its reductions"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--C", g.C, "Integration constant C (default 1)");
  app.add_option("--tol", g.tol, "Tolerance override");
  app.add_option("--grid", g.grid, "Grid spec, e.g. t=0.5:4:7,x=-2:2:7");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "text", "csv"}));
  app.add_option("--out", g.out, "Output file (directory for report)");
  app.add_option("--config", g.config, "Run configuration JSON");
  app.add_flag("--thorough", g.thorough, "Also run at C = 0.25 and 9");
  app.add_flag("--stable-output", g.stable, "Omit wall times for byte-stable output");

  std::vector<std::string> cases, what;
  auto* verify = app.add_subcommand("verify", "Run selected checks");
  verify->add_option("--case", cases, "Catalog cases (a, b, c+, c-, kink+, kink-, phi4, sine-gordon)");
  verify->add_option("--what", what, "Checks to run (comma separated)");

  app.add_subcommand("report", "Run the default suite; write report.json and kink profiles");

  auto* solve = app.add_subcommand("solve", "Numerical solvers");
  solve->require_subcommand(1);
  auto* kink = solve->add_subcommand("kink", "Shoot the kink of the reduced equations");
  std::optional<double> xmax;
  int n = 321;
  kink->add_option("--xmax", xmax, "Half-width of the report grid (default 8/sqrt(C))");
  kink->add_option("--n", n, "Grid points");

  auto* lift = app.add_subcommand("lift", "Lift a flat kink to a curved solution");
  std::string potential, var = "phi", vacua;
  double lift_xmax = 0.0;
  int lift_n = 41;
  lift->add_option("--potential", potential, "V as an expression")->required();
  lift->add_option("--var", var, "Field variable name");
  lift->add_option("--vacua", vacua, "Adjacent vacua a,b")->required();
  lift->add_option("--xmax", lift_xmax, "Half-width of the sample grid");
  lift->add_option("--n", lift_n, "Sample points");

  std::string metric, fields, point;
  int depth = 2;
  auto* cotton = app.add_subcommand("cotton", "Cotton tensor of a metric file");
  cotton->add_option("--metric", metric, "Metric JSON")->required();
  cotton->add_option("--point", point, "Single point t,x,y");

  auto* killing = app.add_subcommand("killing", "Killing residuals of vector fields");
  killing->add_option("--metric", metric, "Metric JSON")->required();
  killing->add_option("--fields", fields, "Fields JSON")->required();

  auto* kdim = app.add_subcommand("killing-dim", "Estimate the isometry dimension at a point");
  kdim->add_option("--metric", metric, "Metric JSON")->required();
  kdim->add_option("--point", point, "Point t,x,y")->required();
  kdim->add_option("--depth", depth, "Prolongation depth (1 or 2)");

  auto* catalog = app.add_subcommand("catalog", "Catalog of closed-form solutions");
  catalog->require_subcommand(1);
  auto* exp = catalog->add_subcommand("export", "Write a catalog entry as JSON");
  std::string tag, ewhat;
  exp->add_option("--case", tag, "Case tag")->required();
  exp->add_option("--what", ewhat, "metric2d, metric3d, transform or killing")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verify) return cmd_verify(g, cases, what);
    if (app.got_subcommand("report")) return cmd_report(g);
    if (*kink) return cmd_solve_kink(g, xmax, n);
    if (*lift) return cmd_lift(g, potential, var, vacua, lift_xmax, lift_n);
    if (*cotton) return cmd_cotton(g, metric, point);
    if (*killing) return cmd_killing(g, metric, fields, g.grid);
    if (*kdim) return cmd_killing_dim(g, metric, point, depth);
    if (*exp) return cmd_export(g, tag, ewhat);
  } catch (const ck::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ck::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ck::UnresolvedSymbol& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

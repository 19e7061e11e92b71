#pragma once

// Kinks: the static-gauge shooting solver for the reduced equations, flat
// space kinks by quadrature, and their lift to curved (1+1) dimensions with
// f(x) = k(x/sqrt 2) and ds^2 = V(f) dt^2 - dx^2.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cottonkit/expr.hpp"
#include "cottonkit/geometry.hpp"
#include "cottonkit/jet.hpp"
#include "cottonkit/metric.hpp"
#include "cottonkit/ode.hpp"
#include "cottonkit/report.hpp"

namespace cottonkit {

class ShootingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPotential : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Static-gauge kink, g = diag(h(x), -1).
//
// Trace equation:      -f'' - (h'/2h) f' - C f + f^3 = 0
// Trace-free equation:  h'/h = 2 f''/f'
// Together: f'' = (f^3 - C f)/2 and (ln h)' = (f^3 - C f)/f'.
// State: (f, f', ln h).
// The trace residual re-evaluates an equation the system is built from, so it
// only shows round-off; r + 3 f^2 = C is the independent accuracy check.

struct KinkProfile {
  double C = 0.0;
  int orientation = +1;
  std::vector<double> x, f, h, residual_eq14, first_integral;
  double shooting_parameter = 0.0;  // f'(0)
  int iterations = 0;
  double max_residual = 0.0;  // max |residual_eq14|
  double max_drift = 0.0;     // max |r + 3 f^2 - C|
};

struct KinkSolverOptions {
  int orientation = +1;
  int max_iterations = 200;
};

namespace detail {

inline ode::Rhs kink_rhs(double C) {
  return [C](double, const ode::State& y, ode::State& d) {
    const double src = y[0] * y[0] * y[0] - C * y[0];
    d[0] = y[1];
    d[1] = 0.5 * src;
    d[2] = y[1] == 0.0 ? 0.0 : src / y[1];
  };
}

/// Shooting reduced to (f, f'); the ln h equation is singular once f' turns.
inline ode::Rhs kink_rhs_2(double C) {
  return [C](double, const ode::State& y, ode::State& d) {
    d[0] = y[1];
    d[1] = 0.5 * (y[0] * y[0] * y[0] - C * y[0]);
  };
}

/// +1: f crossed the vacuum (slope too steep); -1: f' changed sign first.
inline int classify(double C, int orient, const ode::State& y) {
  const double f = orient * y[0], p = orient * y[1];
  if (f >= std::sqrt(C)) return +1;
  if (p <= 0.0) return -1;
  return 0;
}

/// Residual of the trace equation and r + 3 f^2 from a state, with
/// r = -(q' + q^2/2) for q = (ln h)'.
inline void kink_diagnostics(double C, const ode::State& y, double& eq14, double& first_integral) {
  const double f = y[0], p = y[1];
  const double src = f * f * f - C * f;
  const double pp = 0.5 * src;
  const double q = src / p;
  const double qp = ((3 * f * f - C) * p * p - src * pp) / (p * p);
  eq14 = -pp - 0.5 * q * p - C * f + f * f * f;
  const double r = -(qp + 0.5 * q * q);
  first_integral = r + 3 * f * f;
}

/// Shooting runs continue past the report range until the trajectory leaves
/// the separatrix; near-separatrix deviations grow like exp(sqrt(C) x).
inline double classification_end(double C, double xmax) { return xmax + 40.0 / std::sqrt(C); }

template <class Run>
double bisect_slope(double C, int orient, int max_iterations, int& iterations, Run&& run) {
  double lo = 0.0, hi = C;  // |f'(0)| = C/2 lies inside
  iterations = 0;
  while (iterations < max_iterations) {
    ++iterations;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return orient * mid;
    (run(orient * mid) > 0 ? hi : lo) = mid;
  }
  throw ShootingFailure("kink shooting did not converge in " + std::to_string(max_iterations) + " iterations");
}

}  // namespace detail

/// Adaptive shooting on f'(0) with f(0) = 0, h(0) = 1; samples n points on
/// [-xmax, xmax]. Throws ShootingFailure on non-convergence or when the
/// constraint drift exceeds 100 tol.
inline KinkProfile solve_kink_ode(double C, double xmax, int n, double tol, const KinkSolverOptions& so = {}) {
  if (!(C > 0)) throw std::invalid_argument("kink solver needs C > 0");
  if (xmax < 5.0 / std::sqrt(C) * (1 - 1e-12))
    throw std::invalid_argument("kink solver needs xmax >= 5/sqrt(C)");
  if (n < 64) throw std::invalid_argument("kink solver needs at least 64 grid points");
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  const int orient = so.orientation >= 0 ? +1 : -1;
  ode::Options opt;
  opt.atol = tol / 10;
  opt.rtol = tol / 10;

  KinkProfile out;
  out.C = C;
  out.orientation = orient;
  const double s = detail::bisect_slope(C, orient, so.max_iterations, out.iterations, [&](double slope) {
    int cls = 0;
    ode::integrate(detail::kink_rhs_2(C), 0.0, {0.0, slope}, detail::classification_end(C, xmax), opt, [&](double, const ode::State& y) {
      cls = detail::classify(C, orient, y);
      return cls != 0;
    });
    return cls;
  });
  out.shooting_parameter = s;

  const auto sol = ode::integrate(detail::kink_rhs(C), 0.0, {0.0, s, 0.0}, xmax, opt);
  for (int i = 0; i < n; ++i) {
    const double x = -xmax + 2 * xmax * i / (n - 1);
    const ode::State y = sol(std::fabs(x));
    const double sign = x < 0 ? -1.0 : 1.0;
    double eq14 = 0.0, fi = C;
    if (std::fabs(x) > 0) detail::kink_diagnostics(C, y, eq14, fi);
    out.x.push_back(x);
    out.f.push_back(sign * y[0]);
    out.h.push_back(std::exp(y[2]));
    out.residual_eq14.push_back(eq14);
    out.first_integral.push_back(fi);
    out.max_residual = std::max(out.max_residual, std::fabs(eq14));
    out.max_drift = std::max(out.max_drift, std::fabs(fi - C));
  }
  if (!(out.max_drift <= 100 * tol))
    throw ShootingFailure("kink constraint drift " + std::to_string(out.max_drift) + " exceeds 100*tol");
  return out;
}

inline double kink_closed_form(double C, double x) { return std::sqrt(C) * std::tanh(std::sqrt(C) * x / 2); }

/// Fixed-step shooting: sup |f - sqrt(C) tanh(sqrt(C) x/2)| over the nodes of
/// a `steps`-step grid on [0, xmax].
inline double kink_fixed_step_error(double C, double xmax, int steps) {
  int iters = 0;
  const double s = detail::bisect_slope(C, +1, 200, iters, [&](double slope) {
    int cls = 0;
    const double end = detail::classification_end(C, xmax);
    const int total = static_cast<int>(std::ceil(steps * end / xmax));
    ode::integrate_fixed(detail::kink_rhs_2(C), 0.0, {0.0, slope}, xmax * total / steps, total, [&](double, const ode::State& y) {
      cls = detail::classify(C, +1, y);
      return cls != 0;
    });
    return cls;
  });
  const auto nodes = ode::integrate_fixed(detail::kink_rhs_2(C), 0.0, {0.0, s}, xmax, steps);
  double err = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    err = std::max(err, std::fabs(nodes[i][0] - kink_closed_form(C, xmax * i / steps)));
  return err;
}

// ---------------------------------------------------------------------------
// Flat-space kinks.

struct PotentialSpec {
  ExprAst V;
  std::string var = "phi";
  ParamEnv env;
  double vacuum_lo = 0.0, vacuum_hi = 0.0;

  Jet operator()(const Jet& phi) const {
    SymbolTable<Jet> t;
    t.entries.emplace_back(var, phi);
    for (const auto& [k, v] : env) t.entries.emplace_back(k, Jet::constant(v, phi.num_vars(), phi.order()));
    return eval_jet(V, t, phi.num_vars(), phi.order());
  }
  double value(double phi) const { return operator()(Jet::constant(phi, 1, 0)).value(); }
  double d1(double phi) const { return operator()(Jet::variable(0, phi, 1, 1)).partial({1, 0, 0}); }
  double d2(double phi) const { return operator()(Jet::variable(0, phi, 1, 2)).partial({2, 0, 0}); }
};

inline PotentialSpec phi4_potential(double C) {
  return {parse_expr("(phi^2 - C)^2/4"), "phi", {{"C", C}}, -std::sqrt(C), std::sqrt(C)};
}

inline PotentialSpec sine_gordon_potential() {
  return {parse_expr("1 - cos(phi)"), "phi", {}, 0.0, 2 * std::numbers::pi};
}

/// Throws InvalidPotential unless V vanishes at both vacua and is positive
/// strictly between them (checked on a fine sample).
inline void validate_potential(const PotentialSpec& p) {
  validate_symbols(p.V, {p.var}, p.env);
  if (!(p.vacuum_lo < p.vacuum_hi)) throw InvalidPotential("vacua must satisfy lo < hi");
  for (double v : {p.vacuum_lo, p.vacuum_hi})
    if (std::fabs(p.value(v)) > 1e-12)
      throw InvalidPotential("V(" + std::to_string(v) + ") = " + std::to_string(p.value(v)) + " is not zero; vacua must be roots of V");
  for (int i = 1; i < 400; ++i) {
    const double phi = p.vacuum_lo + (p.vacuum_hi - p.vacuum_lo) * i / 400;
    if (!(p.value(phi) > 0)) throw InvalidPotential("V is not positive between the vacua at phi=" + std::to_string(phi));
  }
}

/// Where k'' = V'(k) vanishes: the maximum of V between the vacua.
inline double kink_center(const PotentialSpec& p) {
  const int m = 400;
  int best = 1;
  for (int i = 1; i < m; ++i) {
    const double phi = p.vacuum_lo + (p.vacuum_hi - p.vacuum_lo) * i / m;
    if (p.value(phi) > p.value(p.vacuum_lo + (p.vacuum_hi - p.vacuum_lo) * best / m)) best = i;
  }
  double a = p.vacuum_lo + (p.vacuum_hi - p.vacuum_lo) * (best - 1) / m;
  double b = p.vacuum_lo + (p.vacuum_hi - p.vacuum_lo) * (best + 1) / m;
  if (p.d1(a) <= 0 || p.d1(b) >= 0) return p.vacuum_lo + (p.vacuum_hi - p.vacuum_lo) * best / m;
  for (int it = 0; it < 200; ++it) {
    const double c = 0.5 * (a + b);
    if (c <= a || c >= b) break;
    (p.d1(c) > 0 ? a : b) = c;
  }
  return 0.5 * (a + b);
}

/// A flat kink: a closed form in x, or a numerical solution of
/// k' = sqrt(2 V(k)) through k(0) = kink_center.
class FlatKink {
 public:
  FlatKink(PotentialSpec p, ExprAst closed_form) : p_(std::move(p)), closed_(std::move(closed_form)) {
    validate_symbols(*closed_, {"x"}, p_.env);
  }

  FlatKink(PotentialSpec p, double xmax, double tol) : p_(std::move(p)), xmax_(xmax) {
    validate_potential(p_);
    center_ = kink_center(p_);
    ode::Options opt;
    opt.atol = tol;
    opt.rtol = tol;
    const PotentialSpec& pp = p_;
    const ode::Rhs rhs = [&pp](double, const ode::State& y, ode::State& d) {
      d[0] = std::sqrt(std::max(0.0, 2 * pp.value(y[0])));
    };
    pos_ = ode::integrate(rhs, 0.0, {center_}, xmax, opt);
    neg_ = ode::integrate(rhs, 0.0, {center_}, -xmax, opt);
  }

  const PotentialSpec& potential() const { return p_; }
  const std::optional<ExprAst>& closed_form() const { return closed_; }
  double center() const { return closed_ ? value(0.0) : center_; }
  double xmax() const { return xmax_; }

  double value(double x) const {
    if (closed_) return eval_real(*closed_, std::vector<double>{x}, {"x"}, p_.env);
    if (std::fabs(x) > xmax_ * (1 + 1e-12)) throw std::out_of_range("flat kink sampled only on |x| <= xmax");
    return (x >= 0 ? (*pos_)(x) : (*neg_)(x))[0];
  }

  /// Taylor coefficients k_j (k = sum k_j (x - x0)^j) up to `order`. For the
  /// numerical kink they come from Picard iteration of k' = sqrt(2 V(k))
  /// in jet arithmetic around the sampled value.
  std::vector<double> taylor(double x0, int order) const {
    if (closed_) {
      const Jet j = eval_jet(*closed_, std::vector<double>{x0}, {"x"}, p_.env, order);
      std::vector<double> c(order + 1);
      for (int i = 0; i < j.size(); ++i) c[j.multi_index(i)[0]] = j.coeff(i);
      return c;
    }
    const double k0 = value(x0);
    Jet k = Jet::constant(k0, 1, order);
    for (int it = 0; it < order; ++it) {
      const Jet slope = sqrt(2.0 * p_(k));
      Jet next = Jet::constant(k0, 1, order);
      for (int i = 0; i < slope.size(); ++i) {
        const int deg = slope.multi_index(i)[0];
        if (deg + 1 > order) continue;
        next.coeff_ref(index_of_degree(next, deg + 1)) = slope.coeff(i) / (deg + 1);
      }
      k = next;
    }
    std::vector<double> c(order + 1);
    for (int i = 0; i < k.size(); ++i) c[k.multi_index(i)[0]] = k.coeff(i);
    return c;
  }

 private:
  static int index_of_degree(const Jet& j, int deg) {
    for (int i = 0; i < j.size(); ++i)
      if (j.multi_index(i)[0] == deg) return i;
    throw std::logic_error("degree outside jet");
  }

  PotentialSpec p_;
  std::optional<ExprAst> closed_;
  double xmax_ = std::numeric_limits<double>::infinity();
  double center_ = 0.0;
  std::optional<ode::DenseSolution> pos_, neg_;
};

struct FlatKinkSamples {
  std::vector<double> x, k;
};

/// Numerical flat kink sampled at n points on [-xmax, xmax].
inline FlatKinkSamples flat_kink_solve(const PotentialSpec& p, double xmax, int n, double tol = 1e-13) {
  if (n < 2) throw std::invalid_argument("need at least two samples");
  const FlatKink k(p, xmax, tol);
  FlatKinkSamples s;
  for (int i = 0; i < n; ++i) {
    const double x = -xmax + 2 * xmax * i / (n - 1);
    s.x.push_back(x);
    s.k.push_back(k.value(x));
  }
  return s;
}

// ---------------------------------------------------------------------------
// The lift.

class LiftedKink {
 public:
  explicit LiftedKink(FlatKink k) : k_(std::move(k)) {}

  const FlatKink& flat() const { return k_; }
  const PotentialSpec& potential() const { return k_.potential(); }

  /// f over coordinates (t, x) at p as a jet of `order`.
  Jet field_jet(std::span<const double> p, int order) const {
    const auto c = k_.taylor(p[1] / std::numbers::sqrt2, order);
    Jet f = Jet::constant(0.0, 2, order);
    for (int i = 0; i < f.size(); ++i) {
      const auto& a = f.multi_index(i);
      if (a[0] == 0) f.coeff_ref(i) = c[a[1]] * std::pow(std::numbers::sqrt2, -a[1]);
    }
    return f;
  }

  MetricJet metric_jet(std::span<const double> p, int order) const {
    const Jet f = field_jet(p, order);
    MetricJet g(2, 2, Jet::constant(0.0, 2, order));
    g(0, 0) = potential()(f);
    g(1, 1) = Jet::constant(-1.0, 2, order);
    return g;
  }

  double field(double x) const { return k_.value(x / std::numbers::sqrt2); }
  double g_tt(double x) const { return potential().value(field(x)); }

  /// Closed-form 2D metric when the flat kink is a closed form.
  std::optional<MetricSpec> metric_spec() const {
    if (!k_.closed_form()) return std::nullopt;
    const ExprAst f = field_ast();
    MetricSpec m({"t", "x"}, potential().env);
    m.set(0, 0, substitute(potential().V, {{potential().var, f}})).set(1, 1, "-1");
    return m;
  }

  std::optional<ExprAst> field_expr() const {
    if (!k_.closed_form()) return std::nullopt;
    return field_ast();
  }

 private:
  ExprAst field_ast() const {
    return substitute(*k_.closed_form(), {{"x", ExprAst::symbol("x") / ExprAst::call(UnaryFn::Sqrt, ExprAst(2.0))}});
  }
  FlatKink k_;
};

/// Throws InvalidPotential if V(f) <= 0 at any of the given x.
inline LiftedKink lift_flat_kink(FlatKink k, const std::vector<double>& xs) {
  LiftedKink l(std::move(k));
  for (double x : xs)
    if (!(l.g_tt(x) > 0)) throw InvalidPotential("V(f) <= 0 at x=" + std::to_string(x) + "; lifted metric degenerate");
  return l;
}

struct LiftResidualsAt {
  double trace = 0.0;  // D^2 f + V'(f)
  double trace_free = 0.0;  // max |D_a D_b f - g_ab D^2 f / 2|
  double curvature = 0.0;  // r + V''(f)
  double scale = 1.0;
};

inline LiftResidualsAt lift_residuals_at(const LiftedKink& l, std::span<const double> p) {
  const MetricJet g = l.metric_jet(p, 3);
  const Curvature cv = curvature(g);
  const Jet f = l.field_jet(p, 3);
  const Hessian h = covariant_hessian(cv.conn, f);
  const double fv = f.value();
  const double v1 = l.potential().d1(fv), v2 = l.potential().d2(fv);
  LiftResidualsAt r;
  r.trace = h.laplacian.value() + v1;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      r.trace_free = std::max(r.trace_free, std::fabs(h.dd(a, b).value() - 0.5 * g(a, b).value() * h.laplacian.value()));
  r.curvature = cv.scalar.value() + v2;
  r.scale = curvature_scale(cv) + std::fabs(v1) + std::fabs(v2) + h.dd.max_abs_value();
  return r;
}

/// x-only grid for lift checks (t is irrelevant; sampled at t = 0).
inline Grid lift_grid(double xmax, int n) { return Grid{{{"t", 0.0, 0.0, 1}, {"x", -xmax, xmax, n}}}; }

inline CheckReport lift_residuals(const LiftedKink& l, const Grid& grid, double tol) {
  Stopwatch sw;
  CheckReport rep;
  rep.id = "lift-eom";
  rep.grid = grid.describe();
  rep.tolerance = tol;
  rep.params = l.potential().env;
  ResidualMax acc;
  double e_trace = 0.0, e_trace_free = 0.0;
  for (const auto& p : grid.points()) {
    const LiftResidualsAt r = lift_residuals_at(l, p);
    e_trace = std::max(e_trace, std::fabs(r.trace) / r.scale);
    e_trace_free = std::max(e_trace_free, r.trace_free / r.scale);
    acc.add(p, std::max(std::fabs(r.trace), r.trace_free) / r.scale);
  }
  rep.details["trace"] = e_trace;
  rep.details["trace_free"] = e_trace_free;
  acc.fill(rep);
  rep.wall_time = sw.seconds();
  return rep;
}

inline CheckReport lift_curvature_check(const LiftedKink& l, const Grid& grid, double tol) {
  Stopwatch sw;
  CheckReport rep;
  rep.id = "lift-curvature";
  rep.grid = grid.describe();
  rep.tolerance = tol;
  rep.params = l.potential().env;
  ResidualMax acc;
  for (const auto& p : grid.points()) {
    const LiftResidualsAt r = lift_residuals_at(l, p);
    acc.add(p, r.curvature / r.scale, r.curvature);
  }
  acc.fill(rep);
  rep.wall_time = sw.seconds();
  return rep;
}

}  // namespace cottonkit

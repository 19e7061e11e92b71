#pragma once

// Variational lattice checks. Fields are sampled on a periodic lattice, the
// action is discretized with second-order central differences, and the
// derivative of the discrete action with respect to single lattice values is
// compared with the analytic Euler-Lagrange expressions.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cottonkit/geometry.hpp"
#include "cottonkit/metric.hpp"
#include "cottonkit/reduction.hpp"
#include "cottonkit/report.hpp"

namespace cottonkit {

struct LatticeLevel {
  int n = 0;
  double h = 0.0;
  double discrepancy = 0.0;  // max |discrete - analytic| / max |analytic|
  double scale = 0.0;        // max |analytic|
};

struct LatticeOptions {
  std::vector<int> levels{16, 32, 64, 128};  // sites per axis; multiples of 8
  double length = 2 * std::numbers::pi;      // period of every axis
  double epsilon = 1e-3;                     // size of the lattice-value variation
  double order_tolerance = 0.3;
  // Sign in dW/dg_{mn} = sign (1/4 pi^2) sqrt|g| C^{mn}. The conventional
  // value is -1; with the Ricci sign calibrated so that case (a) has r = +C
  // the lattice finds +1 (see README, "Sign conventions").
  double cotton_sign = -1.0;
};

namespace detail {

/// Lazily evaluated periodic lattice of the scalar components of a field set.
class PeriodicLattice {
 public:
  using Index = std::array<int, 3>;

  PeriodicLattice(std::vector<ExprAst> comps, std::vector<std::string> coords, ParamEnv env, int n, double length)
      : comps_(std::move(comps)), coords_(std::move(coords)), env_(std::move(env)), n_(n), h_(length / n) {
    for (const auto& c : comps_) validate_symbols(c, coords_, env_);
  }

  int dim() const { return static_cast<int>(coords_.size()); }
  int n() const { return n_; }
  double h() const { return h_; }

  Index wrap(Index i) const {
    for (int a = 0; a < dim(); ++a) i[a] = ((i[a] % n_) + n_) % n_;
    return i;
  }

  std::vector<double> position(const Index& i) const {
    std::vector<double> p(dim());
    for (int a = 0; a < dim(); ++a) p[a] = i[a] * h_;
    return p;
  }

  double value(int comp, Index i) const {
    i = wrap(i);
    const long k = key(i);
    auto it = cache_.find(k);
    if (it == cache_.end()) {
      const auto p = position(i);
      std::vector<double> vals;
      for (const auto& c : comps_) vals.push_back(eval_real(c, p, coords_, env_));
      it = cache_.emplace(k, std::move(vals)).first;
    }
    double v = it->second[comp];
    if (shift_comp_ == comp && shift_site_ == k) v += shift_;
    return v;
  }

  /// Temporarily adds `delta` to one lattice value.
  void set_shift(int comp, Index i, double delta) {
    shift_comp_ = comp;
    shift_site_ = key(wrap(i));
    shift_ = delta;
  }
  void clear_shift() { shift_comp_ = -1; }

  /// Central-difference jet of order 2 of one component at a site.
  Jet fd_jet(int comp, const Index& s) const {
    const int d = dim();
    Jet j = Jet::constant(value(comp, s), d, 2);
    auto at = [&](int a, int da, int b, int db) {
      Index q = s;
      q[a] += da;
      if (b >= 0) q[b] += db;
      return value(comp, q);
    };
    for (int i = 0; i < j.size(); ++i) {
      const auto& m = j.multi_index(i);
      int deg = 0, first = -1, second = -1;
      for (int a = 0; a < d; ++a) {
        deg += m[a];
        if (m[a] > 0) (first < 0 ? first : second) = a;
      }
      if (deg == 1) {
        j.coeff_ref(i) = (at(first, 1, -1, 0) - at(first, -1, -1, 0)) / (2 * h_);
      } else if (deg == 2 && second < 0) {  // pure second derivative, coefficient is half of it
        j.coeff_ref(i) = 0.5 * (at(first, 1, -1, 0) - 2 * value(comp, s) + at(first, -1, -1, 0)) / (h_ * h_);
      } else if (deg == 2) {
        j.coeff_ref(i) = (at(first, 1, second, 1) - at(first, 1, second, -1) - at(first, -1, second, 1) +
                          at(first, -1, second, -1)) /
                         (4 * h_ * h_);
      }
    }
    return j;
  }

  /// Sites of the radius-1 box around s.
  std::vector<Index> box(const Index& s) const {
    std::vector<Index> out;
    const int d = dim();
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        for (int c = (d == 3 ? -1 : 0); c <= (d == 3 ? 1 : 0); ++c) out.push_back({s[0] + a, s[1] + b, s[2] + c});
    return out;
  }

 private:
  long key(const Index& i) const { return (static_cast<long>(i[0]) * n_ + i[1]) * n_ + i[2]; }

  std::vector<ExprAst> comps_;
  std::vector<std::string> coords_;
  ParamEnv env_;
  int n_;
  double h_;
  mutable std::unordered_map<long, std::vector<double>> cache_;
  int shift_comp_ = -1;
  long shift_site_ = -1;
  double shift_ = 0.0;
};

/// Symmetric metric component index for (a, b).
inline int metric_comp(int d, int a, int b) {
  if (a > b) std::swap(a, b);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++k)
      if (i == a && j == b) return k;
  throw std::out_of_range("metric component");
}

inline MetricJet fd_metric(const PeriodicLattice& lat, const PeriodicLattice::Index& s) {
  const int d = lat.dim();
  MetricJet g(d, 2, Jet::constant(0.0, d, 2));
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      g(a, b) = lat.fd_jet(metric_comp(d, a, b), s);
      g(b, a) = g(a, b);
    }
  return g;
}

/// d(sum_q L(q)) / d(value), Richardson-extrapolated central difference.
/// With S = h^d sum_q L(q) this is (dS/dvalue)/h^d, the functional derivative.
template <class Density>
double discrete_gradient(PeriodicLattice& lat, int comp, const PeriodicLattice::Index& s, double eps,
                         const Density& density) {
  const auto sites = lat.box(s);
  auto sum_at = [&](double delta) {
    lat.set_shift(comp, s, delta);
    double total = 0.0;
    for (const auto& q : sites) total += density(lat, q);
    lat.clear_shift();
    return total;
  };
  const double d1 = (sum_at(eps) - sum_at(-eps)) / (2 * eps);
  const double d2 = (sum_at(eps / 2) - sum_at(-eps / 2)) / eps;
  return (4 * d2 - d1) / 3;
}

/// Sample sites shared by every level: physical points on a coarse sub-lattice.
inline std::vector<PeriodicLattice::Index> shared_sites(int dim, int n) {
  if (n % 8 != 0) throw std::invalid_argument("lattice levels must be multiples of 8");
  std::vector<PeriodicLattice::Index> out;
  const int per = dim == 2 ? 8 : 4, stride = n / per, offset = dim == 2 ? 0 : n / 8;
  for (int a = 0; a < per; ++a)
    for (int b = 0; b < per; ++b)
      for (int c = 0; c < (dim == 3 ? per : 1); ++c)
        out.push_back({offset + a * stride, offset + b * stride, dim == 3 ? offset + c * stride : 0});
  return out;
}

inline CheckReport convergence_report(const std::string& id, const std::vector<LatticeLevel>& levels,
                                      const LatticeOptions& opt) {
  CheckReport rep;
  rep.id = id;
  std::vector<double> hs, ds;
  std::string grid;
  for (const auto& l : levels) {
    hs.push_back(l.h);
    ds.push_back(l.discrepancy);
    rep.details["discrepancy_n" + std::to_string(l.n)] = l.discrepancy;
    grid += (grid.empty() ? "" : ",") + std::to_string(l.n);
  }
  rep.grid = "periodic n=" + grid;
  if (std::all_of(levels.begin(), levels.end(), [](const LatticeLevel& l) { return l.scale == 0.0 && l.discrepancy == 0.0; })) {
    rep.message = "analytic and discrete gradients vanish identically";
    rep.max_residual = 0.0;
    rep.tolerance = opt.order_tolerance;
    rep.finalize();
    return rep;
  }
  const double order = fitted_order(hs, ds);
  rep.details["order"] = order;
  rep.details["finest_discrepancy"] = ds.back();
  rep.max_residual = std::fabs(order - 2.0);
  rep.tolerance = opt.order_tolerance;
  for (std::size_t i = 1; i < ds.size(); ++i)
    if (!(ds[i] < ds[i - 1])) rep.message = "discrepancy not decreasing under refinement";
  rep.finalize();
  return rep;
}

}  // namespace detail

/// Reduced action versus the gauge and metric field equations. Fields must be
/// periodic with period `length` in t and x.
inline std::vector<LatticeLevel> lattice_levels_2d(const ReducedData& rd, const LatticeOptions& opt = {}) {
  const double kappa = action_prefactor();
  std::vector<ExprAst> comps{rd.g2.component(0, 0), rd.g2.component(0, 1), rd.g2.component(1, 1), rd.a[0], rd.a[1]};
  std::vector<LatticeLevel> out;
  for (int n : opt.levels) {
    detail::PeriodicLattice lat(comps, rd.g2.coordinates(), rd.g2.env(), n, opt.length);
    const double h = lat.h();
    auto density = [&](const detail::PeriodicLattice& l, const detail::PeriodicLattice::Index& q) {
      const Curvature cv = curvature(detail::fd_metric(l, q));
      const double F = (l.value(4, {q[0] + 1, q[1], 0}) - l.value(4, {q[0] - 1, q[1], 0})) / (2 * h) -
                       (l.value(3, {q[0], q[1] + 1, 0}) - l.value(3, {q[0], q[1] - 1, 0})) / (2 * h);
      const double sg = cv.conn.sqrt_abs_det.value();
      const double f = F / sg;
      return kappa * sg * (f * cv.scalar.value() + f * f * f);
    };
    LatticeLevel lv{n, h, 0.0, 0.0};
    double worst = 0.0;
    for (const auto& s : detail::shared_sites(2, n)) {
      const auto p = lat.position(s);
      const FieldEqResiduals res = eom_residuals(rd, p);
      const MetricJet g = rd.g2.evaluate(p, 0);
      const MetricJet gi = inverse(g);
      const double sg = std::sqrt(std::fabs(determinant(g).value()));
      std::array<double, 5> expected{};
      for (int a = 0; a < 2; ++a)
        for (int b = a; b < 2; ++b) {
          double up = 0.0;
          for (int c = 0; c < 2; ++c)
            for (int d = 0; d < 2; ++d) up += gi(a, c).value() * gi(b, d).value() * res.eq12[c * 2 + d];
          expected[detail::metric_comp(2, a, b)] = (a == b ? 1.0 : 2.0) * kappa * sg * up;
        }
      expected[3] = kappa * res.grad_first_integral[1];
      expected[4] = -kappa * res.grad_first_integral[0];
      for (int c = 0; c < 5; ++c) {
        const double got = detail::discrete_gradient(lat, c, s, opt.epsilon, density);
        worst = std::max(worst, std::fabs(got - expected[c]));
        lv.scale = std::max(lv.scale, std::fabs(expected[c]));
      }
    }
    lv.discrepancy = lv.scale > 0 ? worst / lv.scale : worst;
    out.push_back(lv);
  }
  return out;
}

inline CheckReport lattice_variation_check_2d(const ReducedData& rd, const LatticeOptions& opt = {}) {
  Stopwatch sw;
  CheckReport rep = detail::convergence_report("lattice-2d", lattice_levels_2d(rd, opt), opt);
  rep.params = rd.g2.env();
  rep.wall_time = sw.seconds();
  return rep;
}

/// Chern-Simons action of the Christoffel connection versus the Cotton
/// tensor. The metric must be periodic with period `length` on all axes.
inline std::vector<LatticeLevel> lattice_levels_3d(const MetricSpec& m, const LatticeOptions& opt = {}) {
  if (m.dim() != 3) throw std::invalid_argument("Cotton lattice check needs a 3D metric");
  const double norm = 1.0 / (4 * std::numbers::pi * std::numbers::pi);
  std::vector<ExprAst> comps;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) comps.push_back(m.component(a, b));
  const int orient = m.orientation();
  std::vector<LatticeLevel> out;
  for (int n : opt.levels) {
    detail::PeriodicLattice lat(comps, m.coordinates(), m.env(), n, opt.length);
    const double h = lat.h();
    auto density = [&](const detail::PeriodicLattice& l, const detail::PeriodicLattice::Index& q) {
      const Connection c = connection(detail::fd_metric(l, q));
      double G[3][3][3], dG[3][3][3][3];
      for (int r = 0; r < 3; ++r)
        for (int a = 0; a < 3; ++a)
          for (int s = 0; s < 3; ++s) {
            G[r][a][s] = c.gamma(r, a, s).value();
            for (int b = 0; b < 3; ++b) dG[b][r][a][s] = c.gamma(r, a, s).derivative(b).value();
          }
      double w = 0.0;
      for (int al = 0; al < 3; ++al)
        for (int be = 0; be < 3; ++be)
          for (int ga = 0; ga < 3; ++ga) {
            const int e = levi_civita(al, be, ga);
            if (e == 0) continue;
            double t = 0.0;
            for (int r = 0; r < 3; ++r)
              for (int s = 0; s < 3; ++s) {
                t += 0.5 * G[r][al][s] * dG[be][s][ga][r];
                for (int u = 0; u < 3; ++u) t += G[r][al][s] * G[s][be][u] * G[u][ga][r] / 3.0;
              }
            w += e * t;
          }
      return orient * norm * w;
    };
    LatticeLevel lv{n, h, 0.0, 0.0};
    double worst = 0.0;
    for (const auto& s : detail::shared_sites(3, n)) {
      const auto p = lat.position(s);
      const CottonAt ct = cotton_at(m, p);
      const double sg = std::sqrt(std::fabs(determinant(m.evaluate(p, 0)).value()));
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
          const double expected = opt.cotton_sign * (a == b ? 1.0 : 2.0) * norm * sg * ct(a, b);
          const double got = detail::discrete_gradient(lat, detail::metric_comp(3, a, b), s, opt.epsilon, density);
          worst = std::max(worst, std::fabs(got - expected));
          lv.scale = std::max(lv.scale, std::fabs(expected));
        }
    }
    lv.discrepancy = lv.scale > 0 ? worst / lv.scale : worst;
    out.push_back(lv);
  }
  return out;
}

inline CheckReport lattice_cotton_variation_check_3d(const MetricSpec& m, const LatticeOptions& opt = {}) {
  Stopwatch sw;
  CheckReport rep = detail::convergence_report("lattice-cotton", lattice_levels_3d(m, opt), opt);
  rep.params = m.env();
  rep.details["cotton_sign"] = opt.cotton_sign;
  rep.wall_time = sw.seconds();
  return rep;
}

/// Smooth periodic fields for the lattice checks.
inline ReducedData lattice_test_fields_2d(double amplitude = 0.1) {
  ReducedData rd{MetricSpec({"t", "x"}, {{"s", amplitude}, {"C", 1.0}})};
  rd.g2.set(0, 0, "1 + s*sin(x)*cos(t)")
      .set(0, 1, "s*sin(t + 2*x)/2")
      .set(1, 1, "-1 + s*cos(x - t)/2");
  rd.a[0] = parse_expr("s*(cos(x) + sin(2*t)/2)");
  rd.a[1] = parse_expr("s*(sin(t)*cos(x) + 1/2*sin(2*x))");
  return rd;
}

/// The catalog kink faded into flat space by a periodic window centered at
/// (pi, pi): g = eta + w (g_kink - eta), a = w a_kink.
inline ReducedData windowed_kink_fields(double C) {
  const std::string w = "((1 + cos(t - pi))/2)^4*((1 + cos(x - pi))/2)^4";
  const std::string xs = "(x - pi)";
  ReducedData rd{MetricSpec({"t", "x"}, {{"C", C}, {"pi", std::numbers::pi}})};
  rd.g2.set(0, 0, "1 + " + w + "*(1/cosh(sqrt(C)*" + xs + "/2)^4 - 1)").set(1, 1, "-1");
  rd.a[0] = parse_expr(w + "/cosh(sqrt(C)*" + xs + "/2)^2");
  rd.a[1] = parse_expr("0");
  return rd;
}

inline MetricSpec lattice_test_metric_3d(double amplitude = 0.05) {
  MetricSpec m({"t", "x", "y"}, {{"s", amplitude}});
  m.set(0, 0, "1 + s*sin(x)*sin(y)")
      .set(0, 1, "s*cos(t + y)/2")
      .set(1, 1, "-1 + s*sin(t - x)/2")
      .set(1, 2, "s*cos(2*x)*sin(t)/3")
      .set(2, 2, "-1 + s*cos(y)*cos(t)/2");
  return m;
}

}  // namespace cottonkit

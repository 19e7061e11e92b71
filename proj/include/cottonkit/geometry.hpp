#pragma once

// Curvature engine. Every quantity is a jet at the evaluation point; each
// derivative costs one order, so a metric evaluated at order K yields
// Christoffels at K-1, Riemann/Ricci at K-2, Cotton at K-3.
//
// Conventions:
//   Gamma^m_{an}   = 1/2 g^{ml} (d_a g_{ln} + d_n g_{la} - d_l g_{an})
//   R^r_{smn}      = d_m Gamma^r_{ns} - d_n Gamma^r_{ms}
//                    + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}
//   R_{sn}         = kRicciSign * R^l_{sln}
// kRicciSign is calibrated so that the metric (2/(C t^2)) diag(1,-1) has
// scalar curvature +C; with the plain contraction it comes out -C.

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "cottonkit/expr.hpp"
#include "cottonkit/jet.hpp"
#include "cottonkit/metric.hpp"

namespace cottonkit {

inline constexpr double kRicciSign = -1.0;

/// Connection data: metric, inverse, first derivatives and Christoffels.
struct Connection {
  int dim = 0;
  int order = 0;  // order of the metric jets
  JetTensor g;
  JetTensor ginv;
  Jet det;
  Jet sqrt_abs_det;
  JetTensor dg;     // dg(l, m, n) = d_l g_{mn}
  JetTensor gamma;  // gamma(m, a, n) = Gamma^m_{an}
};

struct Curvature {
  Connection conn;
  JetTensor riemann;      // riemann(r, s, m, n) = R^r_{smn}
  JetTensor ricci;        // R_{mn}
  JetTensor ricci_mixed;  // R^m_n
  JetTensor einstein;     // G^m_n
  Jet scalar;
};

inline Connection connection(const MetricJet& g) {
  const int n = g.dim();
  const int order = g(0, 0).order();
  if (order < 1) throw std::invalid_argument("connection needs metric jets of order >= 1");
  Connection c;
  c.dim = n;
  c.order = order;
  c.g = g;
  c.ginv = inverse(g, &c.det);
  c.sqrt_abs_det = sqrt(c.det.value() < 0 ? -c.det : c.det);
  const Jet zero = Jet::constant(0.0, n, order - 1);
  c.dg = JetTensor(n, 3, zero);
  for (int l = 0; l < n; ++l)
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        c.dg(l, a, b) = g(a, b).derivative(l);
        c.dg(l, b, a) = c.dg(l, a, b);
      }
  c.gamma = JetTensor(n, 3, zero);
  for (int m = 0; m < n; ++m)
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) {
        Jet s = zero;
        for (int l = 0; l < n; ++l) s += c.ginv(m, l) * (c.dg(a, l, b) + c.dg(b, l, a) - c.dg(l, a, b));
        s *= 0.5;
        c.gamma(m, a, b) = s;
        c.gamma(m, b, a) = s;
      }
  return c;
}

inline Curvature curvature(const MetricJet& g) {
  Curvature cv;
  cv.conn = connection(g);
  const Connection& c = cv.conn;
  const int n = c.dim;
  if (c.order < 2) throw std::invalid_argument("curvature needs metric jets of order >= 2");
  const Jet zero = Jet::constant(0.0, n, c.order - 2);
  cv.riemann = JetTensor(n, 4, zero);
  // d_m Gamma^r_{ns}, cached
  JetTensor dgamma(n, 4, zero);
  for (int m = 0; m < n; ++m)
    for (int r = 0; r < n; ++r)
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
          dgamma(m, r, a, b) = c.gamma(r, a, b).derivative(m);
          dgamma(m, r, b, a) = dgamma(m, r, a, b);
        }
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s)
      for (int m = 0; m < n; ++m)
        for (int v = m + 1; v < n; ++v) {
          Jet x = dgamma(m, r, v, s) - dgamma(v, r, m, s);
          for (int l = 0; l < n; ++l) x += c.gamma(r, m, l) * c.gamma(l, v, s) - c.gamma(r, v, l) * c.gamma(l, m, s);
          cv.riemann(r, s, m, v) = x;
          cv.riemann(r, s, v, m) = -x;
        }
  cv.ricci = JetTensor(n, 2, zero);
  for (int s = 0; s < n; ++s)
    for (int v = 0; v < n; ++v) {
      Jet x = zero;
      for (int l = 0; l < n; ++l) x += cv.riemann(l, s, l, v);
      cv.ricci(s, v) = kRicciSign * x;
    }
  cv.ricci_mixed = JetTensor(n, 2, zero);
  cv.scalar = zero;
  for (int m = 0; m < n; ++m)
    for (int v = 0; v < n; ++v) {
      Jet x = zero;
      for (int l = 0; l < n; ++l) x += c.ginv(m, l) * cv.ricci(l, v);
      cv.ricci_mixed(m, v) = x;
    }
  for (int m = 0; m < n; ++m) cv.scalar += cv.ricci_mixed(m, m);
  cv.einstein = cv.ricci_mixed;
  for (int m = 0; m < n; ++m) cv.einstein(m, m) -= 0.5 * cv.scalar;
  return cv;
}

/// Point values of the curvature pipeline.
struct CurvatureAt {
  std::vector<double> point;
  int dim = 0;
  std::vector<double> g, ginv;
  std::vector<double> gamma;    // [m][a][n]
  std::vector<double> riemann;  // [r][s][m][n]
  std::vector<double> ricci_mixed;
  std::vector<double> einstein;
  double scalar = 0.0;

  double christoffel(int m, int a, int n) const { return gamma[(m * dim + a) * dim + n]; }
  double riemann_at(int r, int s, int m, int n) const { return riemann[((r * dim + s) * dim + m) * dim + n]; }
  double ricci_at(int m, int n) const { return ricci_mixed[m * dim + n]; }
  double einstein_at(int m, int n) const { return einstein[m * dim + n]; }
};

inline CurvatureAt to_values(const Curvature& cv, std::span<const double> p) {
  CurvatureAt out;
  out.point.assign(p.begin(), p.end());
  out.dim = cv.conn.dim;
  out.g = cv.conn.g.values();
  out.ginv = cv.conn.ginv.values();
  out.gamma = cv.conn.gamma.values();
  out.riemann = cv.riemann.values();
  out.ricci_mixed = cv.ricci_mixed.values();
  out.einstein = cv.einstein.values();
  out.scalar = cv.scalar.value();
  return out;
}

/// Christoffels at p (carried at order 2 internally, so their second
/// derivatives are available to jet consumers of `connection`).
inline CurvatureAt christoffel_at(const MetricSpec& m, std::span<const double> p) {
  const Connection c = connection(m.evaluate(p, 3));
  CurvatureAt out;
  out.point.assign(p.begin(), p.end());
  out.dim = c.dim;
  out.g = c.g.values();
  out.ginv = c.ginv.values();
  out.gamma = c.gamma.values();
  return out;
}

inline CurvatureAt curvature_at(const MetricSpec& m, std::span<const double> p) {
  return to_values(curvature(m.evaluate(p, 2)), p);
}

/// 1 + max |R^r_{smn}|, the normalization for "vanishes" checks.
inline double curvature_scale(const Curvature& cv) { return 1.0 + cv.riemann.max_abs_value(); }

/// max |D_l g_{mn}|; zero for the Levi-Civita connection.
inline double metric_compatibility_residual(const Connection& c) {
  const int n = c.dim;
  double r = 0.0;
  for (int l = 0; l < n; ++l)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double x = c.dg(l, a, b).value();
        for (int s = 0; s < n; ++s)
          x -= c.gamma(s, l, a).value() * c.g(s, b).value() + c.gamma(s, l, b).value() * c.g(a, s).value();
        r = std::max(r, std::fabs(x));
      }
  return r;
}

/// max |R_{r[smn]}| (first Bianchi identity, lowered first index).
inline double first_bianchi_residual(const Curvature& cv) {
  const int n = cv.conn.dim;
  auto low = [&](int r, int s, int m, int v) {
    double x = 0.0;
    for (int l = 0; l < n; ++l) x += cv.conn.g(r, l).value() * cv.riemann(l, s, m, v).value();
    return x;
  };
  double res = 0.0;
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s)
      for (int m = 0; m < n; ++m)
        for (int v = 0; v < n; ++v)
          res = std::max(res, std::fabs(low(r, s, m, v) + low(r, m, v, s) + low(r, v, s, m)));
  return res;
}

/// Levi-Civita symbol in three dimensions.
inline int levi_civita(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

/// D_a T^n_b for a (1,1) tensor; result(a, n, b).
inline JetTensor covariant_derivative_mixed(const JetTensor& t, const Connection& c) {
  const int n = c.dim;
  const int order = t(0, 0).order() - 1;
  if (order < 0) throw std::invalid_argument("tensor jets exhausted");
  const Jet zero = Jet::constant(0.0, n, order);
  JetTensor out(n, 3, zero);
  for (int a = 0; a < n; ++a)
    for (int v = 0; v < n; ++v)
      for (int b = 0; b < n; ++b) {
        Jet x = t(v, b).derivative(a);
        for (int l = 0; l < n; ++l) x += c.gamma(v, a, l) * t(l, b) - c.gamma(l, a, b) * t(v, l);
        out(a, v, b) = x;
      }
  return out;
}

/// nabla_e T_{a1..ak} for a covariant tensor; the new index comes first.
inline JetTensor covariant_derivative_lower(const JetTensor& t, const Connection& c) {
  const int n = c.dim;
  const int k = t.rank();
  const int order = t.at_flat(0).order() - 1;
  if (order < 0) throw std::invalid_argument("tensor jets exhausted");
  const Jet zero = Jet::constant(0.0, n, order);
  JetTensor out(n, k + 1, zero);
  std::vector<int> idx(k);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    std::size_t rem = flat;
    for (int i = k - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(rem % n);
      rem /= n;
    }
    for (int e = 0; e < n; ++e) {
      Jet x = t.at_flat(flat).derivative(e);
      for (int i = 0; i < k; ++i) {
        std::vector<int> j = idx;
        for (int f = 0; f < n; ++f) {
          j[i] = f;
          std::size_t fl = 0;
          for (int q = 0; q < k; ++q) fl = fl * n + j[q];
          x -= c.gamma(f, e, idx[i]) * t.at_flat(fl);
        }
      }
      out.at_flat(static_cast<std::size_t>(e) * t.size() + flat) = x;
    }
  }
  return out;
}

/// Cotton tensor C^{mn} = 1/(2 sqrt|g|) (eps^{mab} D_a R^n_b + eps^{nab} D_a R^m_b),
/// from the mixed Ricci tensor (or any (1,1) tensor passed as `source`).
inline JetTensor cotton(const Curvature& cv, const JetTensor& source, int orientation = +1) {
  const Connection& c = cv.conn;
  if (c.dim != 3) throw std::invalid_argument("the Cotton tensor is defined in three dimensions");
  const JetTensor dr = covariant_derivative_mixed(source, c);
  const int order = dr(0, 0, 0).order();
  const Jet zero = Jet::constant(0.0, 3, order);
  JetTensor half(3, 2, zero);
  for (int m = 0; m < 3; ++m)
    for (int v = 0; v < 3; ++v) {
      Jet x = zero;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int e = levi_civita(m, a, b);
          if (e != 0) x += static_cast<double>(e) * dr(a, v, b);
        }
      half(m, v) = x;
    }
  const Jet factor = (0.5 * orientation) / c.sqrt_abs_det.truncated(order);
  JetTensor out(3, 2, zero);
  for (int m = 0; m < 3; ++m)
    for (int v = 0; v < 3; ++v) out(m, v) = factor * (half(m, v) + half(v, m));
  return out;
}

inline JetTensor cotton(const Curvature& cv, int orientation = +1) { return cotton(cv, cv.ricci_mixed, orientation); }

struct CottonAt {
  std::vector<double> point;
  std::array<double, 9> c{};  // C^{mn}, row-major
  double scale = 1.0;         // 1 + max |Riemann|
  double operator()(int m, int n) const { return c[m * 3 + n]; }
  double max_abs() const {
    double r = 0.0;
    for (double v : c) r = std::max(r, std::fabs(v));
    return r;
  }
};

inline CottonAt cotton_at(const MetricSpec& m, std::span<const double> p) {
  if (m.dim() != 3) throw std::invalid_argument("cotton_at requires a 3-dimensional metric");
  const Curvature cv = curvature(m.evaluate(p, 3));
  const JetTensor ct = cotton(cv, m.orientation());
  CottonAt out;
  out.point.assign(p.begin(), p.end());
  for (int i = 0; i < 9; ++i) out.c[i] = ct.at_flat(i).value();
  out.scale = curvature_scale(cv);
  return out;
}

/// Residuals of the Cotton identities at one point (metric order 4).
struct CottonIdentities {
  double trace = 0.0;         // |g_{mn} C^{mn}|
  double asymmetry = 0.0;     // max |C^{mn} - C^{nm}|
  double divergence = 0.0;    // max_n |D_m C^{mn}|
  double einstein_form = 0.0; // max |C[Ricci] - C[Einstein]|
  double scale = 1.0;
};

inline CottonIdentities cotton_identities_at(const MetricSpec& m, std::span<const double> p) {
  if (m.dim() != 3) throw std::invalid_argument("Cotton identities require a 3-dimensional metric");
  const Curvature cv = curvature(m.evaluate(p, 4));
  const Connection& c = cv.conn;
  const JetTensor ct = cotton(cv, m.orientation());  // order 1
  const JetTensor ce = cotton(cv, cv.einstein, m.orientation());
  CottonIdentities r;
  r.scale = curvature_scale(cv);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      r.trace += c.g(a, b).value() * ct(a, b).value();
      r.asymmetry = std::max(r.asymmetry, std::fabs(ct(a, b).value() - ct(b, a).value()));
      r.einstein_form = std::max(r.einstein_form, std::fabs(ct(a, b).value() - ce(a, b).value()));
    }
  r.trace = std::fabs(r.trace);
  for (int v = 0; v < 3; ++v) {
    double d = 0.0;
    for (int a = 0; a < 3; ++a) {
      d += ct(a, v).partial({a == 0, a == 1, a == 2});
      for (int l = 0; l < 3; ++l)
        d += c.gamma(a, a, l).value() * ct(l, v).value() + c.gamma(v, a, l).value() * ct(a, l).value();
    }
    r.divergence = std::max(r.divergence, std::fabs(d));
  }
  return r;
}

/// D_a D_b s and D^2 s = g^{ab} D_a D_b s. `s` must carry order >= 2.
struct Hessian {
  JetTensor dd;  // lower indices
  Jet laplacian;
};

inline Hessian covariant_hessian(const Connection& c, const Jet& s) {
  const int n = c.dim;
  if (s.order() < 2) throw std::invalid_argument("covariant Hessian needs a scalar jet of order >= 2");
  const int order = std::min(s.order() - 2, c.order - 1);
  const Jet zero = Jet::constant(0.0, n, order);
  Hessian h{JetTensor(n, 2, zero), zero};
  std::array<Jet, 3> ds;
  for (int a = 0; a < n; ++a) ds[a] = s.derivative(a);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Jet x = ds[a].derivative(b);
      for (int l = 0; l < n; ++l) x -= c.gamma(l, a, b) * ds[l];
      h.dd(a, b) = x.truncated(order);
      h.dd(b, a) = h.dd(a, b);
    }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) h.laplacian += c.ginv(a, b) * h.dd(a, b);
  return h;
}

struct HessianAt {
  std::vector<double> dd;  // dim x dim
  double laplacian = 0.0;
};

inline HessianAt covariant_hessian_at(const MetricSpec& m, const ExprAst& s, std::span<const double> p) {
  const Connection c = connection(m.evaluate(p, 2));
  const Jet sj = eval_jet(s, p, m.coordinates(), m.env(), 2);
  const Hessian h = covariant_hessian(c, sj);
  return {h.dd.values(), h.laplacian.value()};
}

/// Pullback (F^* g)_{ab} = dx^m/du^a dx^n/du^b g_{mn}(x(u)) as jets of
/// `order`. `map` gives the target coordinates as functions of the new ones.
inline MetricJet pullback_metric(const std::vector<ExprAst>& map, const std::vector<std::string>& new_coordinates,
                                 const ParamEnv& map_env, const MetricSpec& target, std::span<const double> p,
                                 int order) {
  const int n = target.dim();
  if (static_cast<int>(map.size()) != n || static_cast<int>(new_coordinates.size()) != n)
    throw std::invalid_argument("map must have one component per target coordinate");
  const auto table = coordinate_jets(p, new_coordinates, map_env, order + 1);
  std::vector<Jet> x;
  for (const auto& e : map) x.push_back(eval_jet(e, table, n, order + 1));
  JetTensor jac(n, 2, Jet::constant(0.0, n, order));  // jac(m, a) = dx^m / du^a
  for (int m = 0; m < n; ++m)
    for (int a = 0; a < n; ++a) jac(m, a) = x[m].derivative(a);
  const Jet det = determinant(jac);
  if (!(std::fabs(det.value()) >= kDegeneracyThreshold))
    throw DegenerateMetric("singular Jacobian: |det J| = " + std::to_string(std::fabs(det.value())));
  SymbolTable<Jet> tt;
  for (int m = 0; m < n; ++m) tt.entries.emplace_back(target.coordinates()[m], x[m]);
  for (const auto& [name, v] : target.env()) tt.entries.emplace_back(name, Jet::constant(v, n, order + 1));
  JetTensor gt(n, 2, Jet::constant(0.0, n, order + 1));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      const ExprAst& e = target.component(a, b);
      if (e.is_zero_literal()) continue;
      gt(a, b) = eval_jet(e, tt, n, order + 1);
      gt(b, a) = gt(a, b);
    }
  MetricJet out(n, 2, Jet::constant(0.0, n, order));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      Jet s = Jet::constant(0.0, n, order);
      for (int m = 0; m < n; ++m)
        for (int v = 0; v < n; ++v) {
          if (gt(m, v).is_constant() && gt(m, v).value() == 0.0) continue;
          s += jac(m, a) * jac(v, b) * gt(m, v);
        }
      out(a, b) = s;
      out(b, a) = s;
    }
  return out;
}

inline std::vector<double> pullback_metric_at(const std::vector<ExprAst>& map,
                                              const std::vector<std::string>& new_coordinates,
                                              const ParamEnv& map_env, const MetricSpec& target,
                                              std::span<const double> p) {
  return pullback_metric(map, new_coordinates, map_env, target, p, 0).values();
}

}  // namespace cottonkit

#pragma once

// Kaluza-Klein reduction of a y-independent 3D metric:
//   g3 = phi * [ (g_ab - a_a a_b) du^a du^b - 2 a_a du^a dy - dy^2 ]
// and the 2D field equations that follow from the reduced Chern-Simons action.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cottonkit/expr.hpp"
#include "cottonkit/geometry.hpp"
#include "cottonkit/metric.hpp"

namespace cottonkit {

struct ReducedData {
  MetricSpec g2;                  // over (t, x)
  std::array<ExprAst, 2> a{0.0, 0.0};  // a_t, a_x
  ExprAst phi = 1.0;
};

namespace detail {

inline bool is_literal(const ExprAst& e, double v) {
  return e.node().kind == ExprKind::Number && e.node().number == v;
}

inline ExprAst mul(const ExprAst& x, const ExprAst& y) {
  if (x.is_zero_literal() || y.is_zero_literal()) return 0.0;
  if (is_literal(x, 1.0)) return y;
  if (is_literal(y, 1.0)) return x;
  return x * y;
}

inline ExprAst sub(const ExprAst& x, const ExprAst& y) {
  if (y.is_zero_literal()) return x;
  if (x.is_zero_literal()) return -y;
  return x - y;
}

inline ExprAst neg(const ExprAst& x) { return x.is_zero_literal() ? ExprAst(0.0) : -x; }

}  // namespace detail

/// 3D metric over (t, x, y) built from composed trees of the 2D data.
inline MetricSpec assemble_3d_metric(const ReducedData& rd, const std::string& fiber = "y") {
  std::vector<std::string> coords = rd.g2.coordinates();
  coords.push_back(fiber);
  MetricSpec m(coords, rd.g2.env(), rd.g2.orientation());
  using detail::mul;
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) m.set(a, b, mul(rd.phi, detail::sub(rd.g2.component(a, b), mul(rd.a[a], rd.a[b]))));
  for (int a = 0; a < 2; ++a) m.set(a, 2, mul(rd.phi, detail::neg(rd.a[a])));
  m.set(2, 2, detail::neg(rd.phi));
  return m;
}

/// Jet of the dual field strength f = (d_t a_x - d_x a_t)/sqrt|det g2|
/// (eps_{tx} = +1) to the given order.
inline Jet field_strength_jet(const ReducedData& rd, std::span<const double> p, int order) {
  const auto table = coordinate_jets(p, rd.g2.coordinates(), rd.g2.env(), order + 1);
  const Jet at = eval_jet(rd.a[0], table, 2, order + 1);
  const Jet ax = eval_jet(rd.a[1], table, 2, order + 1);
  const MetricJet g = rd.g2.evaluate(p, order);
  const Jet det = determinant(g);
  if (!(std::fabs(det.value()) > kDegeneracyThreshold))
    throw DegenerateMetric("degenerate 2D metric: |det g| = " + std::to_string(std::fabs(det.value())));
  const Jet root = sqrt(det.value() < 0 ? -det : det);
  return (ax.derivative(0) - at.derivative(1)) / root;
}

inline double field_strength_f(const ReducedData& rd, std::span<const double> p) {
  return field_strength_jet(rd, p, 0).value();
}

struct ActionDensity {
  double density = 0.0;  // -(1/8 pi^2) sqrt|g| (f r + f^3)
  double theta = 0.0;    // r + f^2
  double f = 0.0;
  double r = 0.0;
};

inline double action_prefactor() { return -1.0 / (8.0 * std::numbers::pi * std::numbers::pi); }

inline ActionDensity reduced_action_density(const ReducedData& rd, std::span<const double> p) {
  const Curvature cv = curvature(rd.g2.evaluate(p, 2));
  ActionDensity out;
  out.f = field_strength_f(rd, p);
  out.r = cv.scalar.value();
  out.density = action_prefactor() * cv.conn.sqrt_abs_det.value() * (out.f * out.r + out.f * out.f * out.f);
  out.theta = out.r + out.f * out.f;
  return out;
}

struct FieldEqResiduals {
  std::vector<double> point;
  double eq11 = 0.0;
  std::array<double, 4> eq12{};  // lower indices, row-major
  double eq14 = 0.0;
  std::array<double, 4> eq15{};
  double first_integral_value = 0.0;
  double f = 0.0;
  double r = 0.0;
  double scale = 1.0;  // 1 + max |Riemann|
  std::array<double, 2> grad_first_integral{};  // d_t, d_x of r + 3 f^2

  double eq12_max() const {
    double m = 0.0;
    for (double v : eq12) m = std::max(m, std::fabs(v));
    return m;
  }
  double eq15_max() const {
    double m = 0.0;
    for (double v : eq15) m = std::max(m, std::fabs(v));
    return m;
  }
  /// g^{ab} eq12_{ab}; equals eq14 wherever r + 3 f^2 = C.
  double eq12_trace = 0.0;
  double eq15_trace = 0.0;
};

inline FieldEqResiduals eom_residuals(const ReducedData& rd, std::span<const double> p) {
  // metric at order 3 gives r to order 1; f to order 2 feeds the Hessian
  const Curvature cv = curvature(rd.g2.evaluate(p, 3));
  const Connection& c = cv.conn;
  const Jet f = field_strength_jet(rd, p, 2);
  const Hessian hs = covariant_hessian(c, f);
  const double C = rd.g2.env().count("C") ? rd.g2.env().at("C") : 0.0;

  FieldEqResiduals out;
  out.point.assign(p.begin(), p.end());
  const Jet fi = cv.scalar + 3.0 * f.truncated(1) * f.truncated(1);
  out.grad_first_integral = {fi.partial({1, 0, 0}), fi.partial({0, 1, 0})};
  // eps^{ab} d_b: (d_x, -d_t)
  out.eq11 = std::max(std::fabs(out.grad_first_integral[1]), std::fabs(out.grad_first_integral[0]));
  out.first_integral_value = fi.value();

  const double fv = f.value(), rv = cv.scalar.value(), lap = hs.laplacian.value();
  out.f = fv;
  out.r = rv;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double g = c.g(a, b).value(), dd = hs.dd(a, b).value();
      out.eq12[a * 2 + b] = g * (lap - fv * fv * fv - 0.5 * rv * fv) - dd;
      out.eq15[a * 2 + b] = dd - 0.5 * g * lap;
    }
  out.eq14 = lap - C * fv + fv * fv * fv;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      out.eq12_trace += c.ginv(a, b).value() * out.eq12[a * 2 + b];
      out.eq15_trace += c.ginv(a, b).value() * out.eq15[a * 2 + b];
    }
  out.scale = curvature_scale(cv);
  return out;
}

struct KkRelation {
  double R3 = 0.0;
  double r = 0.0;
  double f = 0.0;
  double residual = 0.0;  // R3 - (r + f^2/2)
  double scale = 1.0;
};

inline KkRelation kk_relation_at(const ReducedData& rd, std::span<const double> p) {
  const MetricSpec m3 = assemble_3d_metric(rd);
  std::vector<double> p3(p.begin(), p.end());
  p3.push_back(0.0);
  const Curvature c3 = curvature(m3.evaluate(p3, 2));
  const Curvature c2 = curvature(rd.g2.evaluate(p, 2));
  KkRelation k;
  k.R3 = c3.scalar.value();
  k.r = c2.scalar.value();
  k.f = field_strength_f(rd, p);
  k.residual = k.R3 - (k.r + 0.5 * k.f * k.f);
  k.scale = std::max(curvature_scale(c3), curvature_scale(c2));
  return k;
}

}  // namespace cottonkit

#pragma once

// Closed-form solutions of the reduced field equations, their 3D lifts,
// conformally flat coordinates and Killing fields.
//
// Sign pairing: with eps_{tx} = +1, a_t = +1/(sqrt(C) x) gives f = +sqrt(C),
// so the "plus" cases carry a_t > 0 and g_ty = -a_t.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cottonkit/expr.hpp"
#include "cottonkit/metric.hpp"
#include "cottonkit/reduction.hpp"
#include "cottonkit/report.hpp"

namespace cottonkit {

enum class CaseTag { A, B, Cplus, Cminus, KinkPlus, KinkMinus };

inline std::string to_string(CaseTag t) {
  switch (t) {
    case CaseTag::A: return "a";
    case CaseTag::B: return "b";
    case CaseTag::Cplus: return "c+";
    case CaseTag::Cminus: return "c-";
    case CaseTag::KinkPlus: return "kink+";
    case CaseTag::KinkMinus: return "kink-";
  }
  return "?";
}

inline CaseTag parse_case_tag(std::string_view s) {
  if (s == "a" || s == "A") return CaseTag::A;
  if (s == "b" || s == "B") return CaseTag::B;
  if (s == "c+" || s == "Cplus" || s == "c") return CaseTag::Cplus;
  if (s == "c-" || s == "Cminus") return CaseTag::Cminus;
  if (s == "kink+" || s == "KinkPlus" || s == "kink") return CaseTag::KinkPlus;
  if (s == "kink-" || s == "KinkMinus") return CaseTag::KinkMinus;
  throw std::invalid_argument("unknown case '" + std::string(s) + "'");
}

inline bool is_kink(CaseTag t) { return t == CaseTag::KinkPlus || t == CaseTag::KinkMinus; }
inline bool is_minus(CaseTag t) { return t == CaseTag::Cminus || t == CaseTag::KinkMinus; }

struct SolutionCase {
  CaseTag tag = CaseTag::A;
  double C = 1.0;

  SolutionCase(CaseTag t, double c) : tag(t), C(c) {
    if (!std::isfinite(c)) throw std::invalid_argument("C must be finite");
    if (t == CaseTag::B ? !(c < 0) : !(c > 0))
      throw std::invalid_argument("case " + to_string(t) + (t == CaseTag::B ? " needs C < 0" : " needs C > 0"));
  }
  ParamEnv env() const { return {{"C", C}}; }
};

struct Solution2D {
  ReducedData rd;
  ExprAst f;  // expected dual field strength over (t, x)
  ExprAst r;  // expected scalar curvature
};

struct Solution3D {
  MetricSpec metric;
  ExprAst R;
};

namespace detail {

inline const std::vector<std::string>& tx() {
  static const std::vector<std::string> c{"t", "x"};
  return c;
}
inline const std::vector<std::string>& txy() {
  static const std::vector<std::string> c{"t", "x", "y"};
  return c;
}
inline const std::vector<std::string>& TXY() {
  static const std::vector<std::string> c{"T", "X", "Y"};
  return c;
}

inline ExprAst signed_expr(bool minus, std::string_view text) {
  const ExprAst e = parse_expr(text);
  return minus ? -e : e;
}

}  // namespace detail

inline Solution2D solution_2d(const SolutionCase& sc) {
  Solution2D s{ReducedData{MetricSpec(detail::tx(), sc.env())}, 0.0, 0.0};
  MetricSpec& g = s.rd.g2;
  const bool minus = is_minus(sc.tag);
  switch (sc.tag) {
    case CaseTag::A:
      g.set(0, 0, "2/(C*t^2)");
      g.set(1, 1, "-2/(C*t^2)");
      s.r = parse_expr("C");
      break;
    case CaseTag::B:
      g.set(0, 0, "2/((-C)*x^2)");
      g.set(1, 1, "-2/((-C)*x^2)");
      s.r = parse_expr("C");
      break;
    case CaseTag::Cplus:
    case CaseTag::Cminus:
      g.set(0, 0, "1/(C*x^2)");
      g.set(1, 1, "-1/(C*x^2)");
      s.rd.a[0] = detail::signed_expr(minus, "1/(sqrt(C)*x)");
      s.f = detail::signed_expr(minus, "sqrt(C)");
      s.r = parse_expr("-2*C");
      break;
    case CaseTag::KinkPlus:
    case CaseTag::KinkMinus:
      // g_tt = 0 in the 3D line element forces a_t^2 = g2_tt = sech^4.
      g.set(0, 0, "1/cosh(sqrt(C)/2*x)^4");
      g.set(1, 1, "-1");
      s.rd.a[0] = detail::signed_expr(minus, "1/cosh(sqrt(C)/2*x)^2");
      s.f = detail::signed_expr(minus, "sqrt(C)*tanh(sqrt(C)/2*x)");
      s.r = parse_expr("-2*C+3*C/cosh(sqrt(C)/2*x)^2");
      break;
  }
  return s;
}

inline Solution3D solution_3d(const SolutionCase& sc) {
  Solution3D s{MetricSpec(detail::txy(), sc.env()), 0.0};
  MetricSpec& g = s.metric;
  const bool minus = is_minus(sc.tag);
  switch (sc.tag) {
    case CaseTag::A:
      g.set(0, 0, "2/(C*t^2)");
      g.set(1, 1, "-2/(C*t^2)");
      g.set(2, 2, "-1");
      s.R = parse_expr("C");
      break;
    case CaseTag::B:
      g.set(0, 0, "2/((-C)*x^2)");
      g.set(1, 1, "-2/((-C)*x^2)");
      g.set(2, 2, "-1");
      s.R = parse_expr("C");
      break;
    case CaseTag::Cplus:
    case CaseTag::Cminus:
      g.set(0, 2, detail::signed_expr(!minus, "1/(sqrt(C)*x)"));
      g.set(1, 1, "-1/(C*x^2)");
      g.set(2, 2, "-1");
      s.R = parse_expr("-3*C/2");
      break;
    case CaseTag::KinkPlus:
    case CaseTag::KinkMinus:
      g.set(0, 2, detail::signed_expr(!minus, "1/cosh(sqrt(C)/2*x)^2"));
      g.set(1, 1, "-1");
      g.set(2, 2, "-1");
      s.R = parse_expr("-3*C/2+5*C/(2*cosh(sqrt(C)/2*x)^2)");
      break;
  }
  return s;
}

/// Map (t, x, y) -> (T, X, Y) into flat coordinates where the catalog metric
/// equals omega(T, X, Y) * diag(1, -1, -1).
struct TransformSpec {
  std::vector<std::string> source = detail::txy();
  std::vector<std::string> target = detail::TXY();
  std::vector<ExprAst> map;  // T, X, Y in source coordinates
  ExprAst omega;             // in target coordinates
  ParamEnv env;
  std::string domain;  // human-readable restriction
  std::function<bool(std::span<const double>)> in_domain;
};

namespace detail {

/// Substitutes (t, x, y) -> given trees in every component.
inline std::vector<ExprAst> compose(const std::vector<ExprAst>& map, const std::map<std::string, ExprAst>& with) {
  std::vector<ExprAst> out;
  for (const auto& e : map) out.push_back(substitute(e, with));
  return out;
}

// Printed map into the Poincare form 4/(C X^2) (dT^2 - dX^2 - dY^2):
// u = T + Y = t + x s, v = T - Y = -s/sqrt(C), X = sqrt(x/sqrt(C))/cosh(sqrt(C) y/2),
// with s = tanh(sqrt(C) y/2).
inline std::vector<ExprAst> c_map() {
  const ExprAst s = parse_expr("tanh(sqrt(C)*y/2)");
  const ExprAst u = parse_expr("t") + parse_expr("x") * s;
  const ExprAst v = -s / parse_expr("sqrt(C)");
  return {(u + v) / ExprAst(2.0), parse_expr("sqrt(x/sqrt(C))/cosh(sqrt(C)*y/2)"), (u - v) / ExprAst(2.0)};
}

inline ExprAst flip_t() { return -ExprAst::symbol("t"); }

}  // namespace detail

inline bool has_transform(CaseTag) { return true; }

inline TransformSpec transform(const SolutionCase& sc) {
  TransformSpec tr;
  tr.env = sc.env();
  const bool minus = is_minus(sc.tag);
  switch (sc.tag) {
    case CaseTag::A:
      tr.map = {parse_expr("t*cosh(sqrt(C/2)*y)"), parse_expr("x"), parse_expr("t*sinh(sqrt(C/2)*y)")};
      tr.omega = parse_expr("2/(C*(T^2-Y^2))");
      tr.domain = "t > 0";
      tr.in_domain = [](std::span<const double> p) { return p[0] > 0; };
      break;
    case CaseTag::B:
      tr.map = {parse_expr("t"), parse_expr("x*cos(sqrt((-C)/2)*y)"), parse_expr("x*sin(sqrt((-C)/2)*y)")};
      tr.omega = parse_expr("2/((-C)*(X^2+Y^2))");
      tr.domain = "x > 0";
      tr.in_domain = [](std::span<const double> p) { return p[1] > 0; };
      break;
    case CaseTag::Cplus:
    case CaseTag::Cminus:
      tr.map = detail::c_map();
      if (minus) tr.map = detail::compose(tr.map, {{"t", detail::flip_t()}});
      tr.omega = parse_expr("4/(C*X^2)");
      tr.domain = "x > 0";
      tr.in_domain = [](std::span<const double> p) { return p[1] > 0; };
      break;
    case CaseTag::KinkPlus:
    case CaseTag::KinkMinus: {
      // (t, x, y) -> (t + y/2, sinh(sqrt(C) x/2)^2/sqrt(C), y), then the case-(c) map
      std::map<std::string, ExprAst> pre{{"t", parse_expr("t+y/2")},
                                         {"x", parse_expr("sinh(sqrt(C)*x/2)^2/sqrt(C)")}};
      tr.map = detail::compose(detail::c_map(), pre);
      if (minus) tr.map = detail::compose(tr.map, {{"t", detail::flip_t()}});
      tr.omega = parse_expr("4/(1-C*(T-Y)^2+C*X^2)");
      tr.domain = "x > 0";
      tr.in_domain = [](std::span<const double> p) { return p[1] > 0; };
      break;
    }
  }
  return tr;
}

/// omega(T, X, Y) diag(1, -1, -1) over the target coordinates.
inline MetricSpec conformal_flat_metric(const TransformSpec& tr) {
  MetricSpec m(tr.target, tr.env);
  m.set(0, 0, tr.omega).set(1, 1, -tr.omega).set(2, 2, -tr.omega);
  return m;
}

using VectorField = std::array<ExprAst, 3>;

namespace detail {

inline VectorField vf(std::string_view a, std::string_view b, std::string_view c) {
  return {parse_expr(a), parse_expr(b), parse_expr(c)};
}

/// Poincare-AdS3 generators in (T, X, Y) pushed to (t, x, y) through the
/// case-(c) map. With a = sqrt(C), s = tanh(a y/2), D = 1 - s^2 and
/// K^u = K^T + K^Y, K^v = K^T - K^Y:
///   xi^t = K^u + a x (1+s^2)/D K^v - 2 a s X/D K^X
///   xi^x = -2 a s x/D K^v + 2 a X/D K^X
///   xi^y = -2/D K^v
inline std::vector<VectorField> c_killing_plus() {
  const std::vector<ExprAst> m = c_map();
  const std::map<std::string, ExprAst> at{{"T", m[0]}, {"X", m[1]}, {"Y", m[2]}};
  const std::vector<VectorField> flat{
      vf("1", "0", "0"),
      vf("0", "0", "1"),
      vf("Y", "0", "T"),
      vf("T", "X", "Y"),
      vf("T^2+X^2+Y^2", "2*T*X", "2*T*Y"),
      vf("-2*T*Y", "-2*X*Y", "-T^2+X^2-Y^2"),
  };
  const ExprAst s = parse_expr("tanh(sqrt(C)*y/2)");
  const ExprAst a = parse_expr("sqrt(C)");
  const ExprAst x = parse_expr("x");
  const ExprAst D = ExprAst(1.0) - pow(s, ExprAst(2.0));
  const ExprAst X = m[1];
  std::vector<VectorField> out;
  for (const auto& k : flat) {
    const ExprAst kt = substitute(k[0], at), kx = substitute(k[1], at), ky = substitute(k[2], at);
    const ExprAst ku = kt + ky, kv = kt - ky;
    VectorField xi;
    xi[0] = ku + a * x * (ExprAst(1.0) + pow(s, ExprAst(2.0))) / D * kv - ExprAst(2.0) * a * s * X / D * kx;
    xi[1] = -(ExprAst(2.0) * a * s * x / D) * kv + ExprAst(2.0) * a * X / D * kx;
    xi[2] = -(ExprAst(2.0) / D) * kv;
    out.push_back(xi);
  }
  return out;
}

}  // namespace detail

/// Known Killing fields: 6 for case (c), 4 for cases (a) and (b).
inline std::vector<VectorField> killing_fields(const SolutionCase& sc) {
  using detail::vf;
  switch (sc.tag) {
    case CaseTag::A:
      return {vf("0", "1", "0"), vf("t", "x", "0"), vf("2*x*t", "x^2+t^2", "0"), vf("0", "0", "1")};
    case CaseTag::B:
      return {vf("1", "0", "0"), vf("t", "x", "0"), vf("t^2+x^2", "2*t*x", "0"), vf("0", "0", "1")};
    case CaseTag::Cplus: return detail::c_killing_plus();
    case CaseTag::Cminus: {
      // t -> -t flips the t component
      std::vector<VectorField> out;
      for (const auto& xi : detail::c_killing_plus()) {
        const std::map<std::string, ExprAst> flip{{"t", detail::flip_t()}};
        out.push_back({-substitute(xi[0], flip), substitute(xi[1], flip), substitute(xi[2], flip)});
      }
      return out;
    }
    default: throw std::invalid_argument("no Killing fields catalogued for case " + to_string(sc.tag));
  }
}

/// Expected number of independent Killing fields.
inline int expected_killing_dimension(CaseTag t) {
  return (t == CaseTag::Cplus || t == CaseTag::Cminus) ? 6 : 4;
}

enum class GridKind { Fields2D, Fields3D, Transform };

/// Standard verification grids, 7 points per axis. Kink field grids span
/// |x| <= 8/sqrt(C): further out sech^4 drops below the degeneracy threshold.
inline Grid standard_grid(const SolutionCase& sc, GridKind kind, int n = 7) {
  Grid g;
  auto axis = [&](const char* name, double lo, double hi) { g.axes.push_back({name, lo, hi, n}); };
  if (sc.tag == CaseTag::A) {
    axis("t", 0.5, 4.0);
    axis("x", -2.0, 2.0);
  } else if (is_kink(sc.tag) && kind != GridKind::Transform) {
    const double w = 8.0 / std::sqrt(sc.C);
    axis("t", -2.0, 2.0);
    axis("x", -w, w);
  } else {
    axis("t", -2.0, 2.0);
    axis("x", 0.25, 4.0);
  }
  if (kind != GridKind::Fields2D) axis("y", -1.0, 1.0);
  return g;
}

}  // namespace cottonkit

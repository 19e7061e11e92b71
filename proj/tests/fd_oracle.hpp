#pragma once

// Independent reference for the jet engine: a quad-precision tree walker
// plus nested central finite differences. Nothing here touches Jet.

#include <quadmath.h>

#include <array>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cottonkit/expr.hpp"
#include "cottonkit/metric.hpp"

namespace oracle {

using Real = __float128;
using Point = std::vector<Real>;

inline Real eval(const cottonkit::ExprNode& n, const std::map<std::string, Real>& vars) {
  using cottonkit::ExprKind;
  using cottonkit::UnaryFn;
  switch (n.kind) {
    case ExprKind::Number: return n.number;
    case ExprKind::Symbol: {
      auto it = vars.find(n.name);
      if (it == vars.end()) throw std::runtime_error("oracle: unbound symbol " + n.name);
      return it->second;
    }
    case ExprKind::Add: return eval(*n.lhs, vars) + eval(*n.rhs, vars);
    case ExprKind::Sub: return eval(*n.lhs, vars) - eval(*n.rhs, vars);
    case ExprKind::Mul: return eval(*n.lhs, vars) * eval(*n.rhs, vars);
    case ExprKind::Div: return eval(*n.lhs, vars) / eval(*n.rhs, vars);
    case ExprKind::Neg: return -eval(*n.lhs, vars);
    case ExprKind::Pow: {
      const Real b = eval(*n.lhs, vars);
      const Real e = eval(*n.rhs, vars);
      if (e == floorq(e) && fabsq(e) <= 64) {
        Real r = 1;
        const int k = static_cast<int>(fabsq(e));
        for (int i = 0; i < k; ++i) r *= b;
        return e < 0 ? 1 / r : r;
      }
      return powq(b, e);
    }
    case ExprKind::Call: {
      const Real a = eval(*n.lhs, vars);
      switch (n.fn) {
        case UnaryFn::Tanh: return tanhq(a);
        case UnaryFn::Cosh: return coshq(a);
        case UnaryFn::Sinh: return sinhq(a);
        case UnaryFn::Exp: return expq(a);
        case UnaryFn::Ln: return logq(a);
        case UnaryFn::Sqrt: return sqrtq(a);
        case UnaryFn::Sin: return sinq(a);
        case UnaryFn::Cos: return cosq(a);
        case UnaryFn::Arctan: return atanq(a);
      }
    }
  }
  throw std::logic_error("oracle: bad node");
}

using ScalarFn = std::function<Real(const Point&)>;

/// Central difference of multi-index alpha with step h, O(h^2); Richardson
/// with h/2 brings it to O(h^4).
inline Real partial(const ScalarFn& f, const Point& p, const std::array<int, 3>& alpha, Real h) {
  auto central = [&](Real step) {
    // product of 1D stencils delta^k f / step^k, offsets (k/2 - j) * step
    std::vector<std::pair<Point, Real>> terms{{p, Real(1)}};
    for (std::size_t v = 0; v < p.size(); ++v) {
      const int k = alpha[v];
      if (k == 0) continue;
      std::vector<std::pair<Point, Real>> next;
      Real binom = 1;
      for (int j = 0; j <= k; ++j) {
        if (j > 0) binom = binom * (k - j + 1) / j;
        const Real w = ((j % 2) ? -binom : binom) / powq(step, k);
        for (const auto& [q, c] : terms) {
          Point r = q;
          r[v] += (Real(k) / 2 - j) * step;
          next.emplace_back(r, c * w);
        }
      }
      terms.swap(next);
    }
    Real s = 0;
    for (const auto& [q, c] : terms) s += c * f(q);
    return s;
  };
  const Real d1 = central(h), d2 = central(h / 2);
  return (4 * d2 - d1) / 3;
}

/// 4th-order central first derivative.
inline Real d1(const ScalarFn& f, Point p, int v, Real h) {
  const Real x = p[v];
  auto at = [&](Real s) {
    p[v] = x + s;
    return f(p);
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

using TensorFn = std::function<std::vector<Real>(const Point&)>;

inline std::vector<Real> d1(const TensorFn& f, Point p, int v, Real h) {
  const Real x = p[v];
  auto at = [&](Real s) {
    p[v] = x + s;
    return f(p);
  };
  const auto a = at(2 * h), b = at(h), c = at(-h), d = at(-2 * h);
  std::vector<Real> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (-a[i] + 8 * b[i] - 8 * c[i] + d[i]) / (12 * h);
  return out;
}

/// Metric components through the quad-precision walker.
struct Metric {
  const cottonkit::MetricSpec* spec;
  int n;
  explicit Metric(const cottonkit::MetricSpec& m) : spec(&m), n(m.dim()) {}

  std::vector<Real> g(const Point& p) const {
    std::map<std::string, Real> vars;
    for (const auto& [k, v] : spec->env()) vars[k] = v;
    for (int i = 0; i < n; ++i) vars[spec->coordinates()[i]] = p[i];
    std::vector<Real> out(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = eval(spec->component(i, j).node(), vars);
    return out;
  }
};

inline std::vector<Real> invert(const std::vector<Real>& g, int n) {
  std::vector<Real> a = g, inv(n * n, 0);
  for (int i = 0; i < n; ++i) inv[i * n + i] = 1;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (fabsq(a[r * n + c]) > fabsq(a[piv * n + c])) piv = r;
    for (int k = 0; k < n; ++k) {
      std::swap(a[c * n + k], a[piv * n + k]);
      std::swap(inv[c * n + k], inv[piv * n + k]);
    }
    const Real d = a[c * n + c];
    for (int k = 0; k < n; ++k) {
      a[c * n + k] /= d;
      inv[c * n + k] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const Real f = a[r * n + c];
      for (int k = 0; k < n; ++k) {
        a[r * n + k] -= f * a[c * n + k];
        inv[r * n + k] -= f * inv[c * n + k];
      }
    }
  }
  return inv;
}

inline constexpr double kStep = 1e-3;

/// Gamma^m_{an}, index (m*n + a)*n + b.
inline std::vector<Real> christoffel(const Metric& m, const Point& p, Real h = kStep) {
  const int n = m.n;
  const auto g = m.g(p);
  const auto gi = invert(g, n);
  TensorFn gf = [&](const Point& q) { return m.g(q); };
  std::vector<std::vector<Real>> dg(n);
  for (int l = 0; l < n; ++l) dg[l] = d1(gf, p, l, h);
  std::vector<Real> out(n * n * n, 0);
  for (int mu = 0; mu < n; ++mu)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Real s = 0;
        for (int l = 0; l < n; ++l)
          s += gi[mu * n + l] * (dg[a][l * n + b] + dg[b][l * n + a] - dg[l][a * n + b]);
        out[(mu * n + a) * n + b] = s / 2;
      }
  return out;
}

/// R^r_{smn} with the library's index convention; index ((r*n+s)*n+m)*n+v.
inline std::vector<Real> riemann(const Metric& m, const Point& p, Real h = kStep) {
  const int n = m.n;
  TensorFn gam = [&](const Point& q) { return christoffel(m, q, h); };
  const auto G = gam(p);
  std::vector<std::vector<Real>> dG(n);
  for (int l = 0; l < n; ++l) dG[l] = d1(gam, p, l, h);
  auto at = [&](int r, int a, int b) { return G[(r * n + a) * n + b]; };
  std::vector<Real> out(n * n * n * n, 0);
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s)
      for (int mu = 0; mu < n; ++mu)
        for (int v = 0; v < n; ++v) {
          Real x = dG[mu][(r * n + v) * n + s] - dG[v][(r * n + mu) * n + s];
          for (int l = 0; l < n; ++l) x += at(r, mu, l) * at(l, v, s) - at(r, v, l) * at(l, mu, s);
          out[((r * n + s) * n + mu) * n + v] = x;
        }
  return out;
}

/// Mixed Ricci R^m_n, using the contraction sign `ricci_sign`.
inline std::vector<Real> ricci_mixed(const Metric& m, const Point& p, double ricci_sign, Real h = kStep) {
  const int n = m.n;
  const auto R = riemann(m, p, h);
  const auto gi = invert(m.g(p), n);
  std::vector<Real> low(n * n, 0), out(n * n, 0);
  for (int s = 0; s < n; ++s)
    for (int v = 0; v < n; ++v) {
      Real x = 0;
      for (int l = 0; l < n; ++l) x += R[((l * n + s) * n + l) * n + v];
      low[s * n + v] = ricci_sign * x;
    }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Real x = 0;
      for (int l = 0; l < n; ++l) x += gi[a * n + l] * low[l * n + b];
      out[a * n + b] = x;
    }
  return out;
}

inline int eps3(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

/// Cotton C^{mn} in three dimensions.
inline std::vector<Real> cotton(const Metric& m, const Point& p, double ricci_sign, int orientation = 1,
                                Real h = kStep) {
  TensorFn ric = [&](const Point& q) { return ricci_mixed(m, q, ricci_sign, h); };
  const auto Rm = ric(p);
  const auto G = christoffel(m, p, h);
  const auto g = m.g(p);
  std::vector<std::vector<Real>> dR(3);
  for (int l = 0; l < 3; ++l) dR[l] = d1(ric, p, l, h);
  auto DR = [&](int a, int v, int b) {
    Real x = dR[a][v * 3 + b];
    for (int l = 0; l < 3; ++l) x += G[(v * 3 + a) * 3 + l] * Rm[l * 3 + b] - G[(l * 3 + a) * 3 + b] * Rm[v * 3 + l];
    return x;
  };
  const Real det = g[0] * (g[4] * g[8] - g[5] * g[7]) - g[1] * (g[3] * g[8] - g[5] * g[6]) +
                   g[2] * (g[3] * g[7] - g[4] * g[6]);
  const Real f = Real(orientation) / (2 * sqrtq(fabsq(det)));
  std::vector<Real> out(9, 0);
  for (int mu = 0; mu < 3; ++mu)
    for (int v = 0; v < 3; ++v) {
      Real x = 0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int e1 = eps3(mu, a, b), e2 = eps3(v, a, b);
          if (e1) x += e1 * DR(a, v, b);
          if (e2) x += e2 * DR(a, mu, b);
        }
      out[mu * 3 + v] = f * x;
    }
  return out;
}

inline Point to_point(const std::vector<double>& p) { return Point(p.begin(), p.end()); }

}  // namespace oracle

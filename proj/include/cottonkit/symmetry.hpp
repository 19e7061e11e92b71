#pragma once

// Killing vectors: the Killing equation as a Lie derivative of the metric,
// Lie brackets, rank-based independence and closure tests, and a pointwise
// estimate of the dimension of the isometry algebra.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cottonkit/catalog.hpp"
#include "cottonkit/expr.hpp"
#include "cottonkit/geometry.hpp"
#include "cottonkit/metric.hpp"
#include "cottonkit/report.hpp"

namespace cottonkit {

using VectorFieldSpec = std::vector<ExprAst>;

inline VectorFieldSpec to_spec(const VectorField& v) { return {v[0], v[1], v[2]}; }

inline std::vector<VectorFieldSpec> to_specs(const std::vector<VectorField>& vs) {
  std::vector<VectorFieldSpec> out;
  for (const auto& v : vs) out.push_back(to_spec(v));
  return out;
}

/// Component jets of a vector field at p.
inline std::vector<Jet> field_jets(const MetricSpec& m, const VectorFieldSpec& xi, std::span<const double> p, int order) {
  if (static_cast<int>(xi.size()) != m.dim()) throw std::invalid_argument("vector field dimension does not match metric");
  const auto table = coordinate_jets(p, m.coordinates(), m.env(), order);
  std::vector<Jet> out;
  for (const auto& e : xi) out.push_back(eval_jet(e, table, m.dim(), order));
  return out;
}

/// (L_xi g)_{mn} = xi^l d_l g_{mn} + g_{ln} d_m xi^l + g_{ml} d_n xi^l,
/// i.e. D_m xi_n + D_n xi_m. Order-0 values, row-major.
inline std::vector<double> lie_derivative_metric(const MetricJet& g, const std::vector<Jet>& xi) {
  const int n = g.dim();
  std::vector<double> out(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) {
        s += xi[l].value() * g(a, b).derivative(l).value();
        s += g(l, b).value() * xi[l].derivative(a).value() + g(a, l).value() * xi[l].derivative(b).value();
      }
      out[a * n + b] = s;
    }
  return out;
}

struct KillingResidualAt {
  double raw = 0.0;         // max |L_xi g|
  double normalized = 0.0;  // raw / (1 + |xi| |dg|)
};

inline KillingResidualAt killing_residual_at(const MetricSpec& m, const VectorFieldSpec& xi, std::span<const double> p) {
  const MetricJet g = m.evaluate(p, 1);
  const std::vector<Jet> v = field_jets(m, xi, p, 1);
  (void)inverse(g);  // degeneracy check
  const auto lg = lie_derivative_metric(g, v);
  KillingResidualAt r;
  for (double x : lg) r.raw = std::max(r.raw, std::fabs(x));
  double nx = 0.0, ng = 0.0;
  for (const auto& c : v) nx = std::max(nx, std::fabs(c.value()));
  for (int l = 0; l < m.dim(); ++l)
    for (int a = 0; a < m.dim(); ++a)
      for (int b = 0; b < m.dim(); ++b) ng = std::max(ng, std::fabs(g(a, b).derivative(l).value()));
  r.normalized = r.raw / (1.0 + nx * ng);
  return r;
}

/// Max normalized Killing residual of every field over the grid.
inline CheckReport killing_residual(const MetricSpec& m, const std::vector<VectorFieldSpec>& fields, const Grid& grid,
                                    double tol) {
  Stopwatch sw;
  CheckReport rep;
  rep.id = "killing";
  rep.grid = grid.describe();
  rep.tolerance = tol;
  rep.params = m.env();
  ResidualMax acc;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    ResidualMax one;
    for (const auto& p : grid.points()) {
      const double r = killing_residual_at(m, fields[k], p).normalized;
      acc.add(p, r);
      one.add(p, r);
    }
    rep.details["field_" + std::to_string(k)] = one.max();
  }
  rep.details["fields"] = static_cast<double>(fields.size());
  acc.fill(rep);
  rep.wall_time = sw.seconds();
  return rep;
}

/// [xi, eta]^m = xi^l d_l eta^m - eta^l d_l xi^m as jets (one order lost).
inline std::vector<Jet> lie_bracket(const std::vector<Jet>& xi, const std::vector<Jet>& eta) {
  const int n = static_cast<int>(xi.size());
  std::vector<Jet> out;
  for (int m = 0; m < n; ++m) {
    Jet s = Jet::constant(0.0, n, std::min(xi[0].order(), eta[0].order()) - 1);
    for (int l = 0; l < n; ++l) s += xi[l] * eta[m].derivative(l) - eta[l] * xi[m].derivative(l);
    out.push_back(s);
  }
  return out;
}

inline std::vector<double> lie_bracket_at(const MetricSpec& m, const VectorFieldSpec& xi, const VectorFieldSpec& eta,
                                          std::span<const double> p) {
  const auto b = lie_bracket(field_jets(m, xi, p, 1), field_jets(m, eta, p, 1));
  std::vector<double> out;
  for (const auto& j : b) out.push_back(j.value());
  return out;
}

namespace detail {

/// Values and first derivatives: (v^m, d_n v^m) flattened.
inline Eigen::VectorXd one_jet_data(const std::vector<Jet>& v) {
  const int n = static_cast<int>(v.size());
  Eigen::VectorXd out(n + n * n);
  for (int m = 0; m < n; ++m) {
    out[m] = v[m].value();
    for (int k = 0; k < n; ++k) out[n + m * n + k] = v[m].derivative(k).value();
  }
  return out;
}

/// Singular values above rel_cutoff * max(sigma_max, reference) count.
/// `reference` is the size entries would have without cancellation, so a
/// matrix of pure roundoff has rank 0 rather than full rank.
inline int numeric_rank(const Eigen::MatrixXd& a, double rel_cutoff = 1e-8, double reference = 0.0) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  const double top = std::max(s.size() ? s[0] : 0.0, reference);
  if (top == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > rel_cutoff * top) ++r;
  return r;
}

}  // namespace detail

/// Rank of the stacked (value, first derivative) matrix at p.
inline int independent_count(const MetricSpec& m, const std::vector<VectorFieldSpec>& fields, std::span<const double> p) {
  const int n = m.dim();
  Eigen::MatrixXd a(n + n * n, static_cast<int>(fields.size()));
  for (std::size_t k = 0; k < fields.size(); ++k) a.col(k) = detail::one_jet_data(field_jets(m, fields[k], p, 1));
  return detail::numeric_rank(a);
}

/// Worst relative least-squares defect of [xi_i, xi_j] against the span of
/// the fields, with one coefficient vector shared by all points.
inline double closure_defect(const MetricSpec& m, const std::vector<VectorFieldSpec>& fields,
                             const std::vector<std::vector<double>>& points) {
  const int n = m.dim();
  const int rows = (n + n * n) * static_cast<int>(points.size());
  const int k = static_cast<int>(fields.size());
  Eigen::MatrixXd a(rows, k);
  std::vector<std::vector<std::vector<Jet>>> jets(points.size());
  for (std::size_t pi = 0; pi < points.size(); ++pi)
    for (int f = 0; f < k; ++f) {
      jets[pi].push_back(field_jets(m, fields[f], points[pi], 2));
      a.block((n + n * n) * pi, f, n + n * n, 1) = detail::one_jet_data(jets[pi][f]);
    }
  const auto qr = a.colPivHouseholderQr();
  double worst = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      Eigen::VectorXd b(rows);
      for (std::size_t pi = 0; pi < points.size(); ++pi)
        b.segment((n + n * n) * pi, n + n * n) = detail::one_jet_data(lie_bracket(jets[pi][i], jets[pi][j]));
      const Eigen::VectorXd x = qr.solve(b);
      worst = std::max(worst, (a * x - b).norm() / (1.0 + b.norm()));
    }
  return worst;
}

/// max |[[a,b],c] + [[b,c],a] + [[c,a],b]| over all triples at p.
inline double jacobi_defect(const MetricSpec& m, const std::vector<VectorFieldSpec>& fields, std::span<const double> p) {
  std::vector<std::vector<Jet>> j;
  for (const auto& f : fields) j.push_back(field_jets(m, f, p, 2));
  double worst = 0.0;
  const std::size_t k = fields.size();
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      for (std::size_t c = b + 1; c < k; ++c) {
        const auto x = lie_bracket(lie_bracket(j[a], j[b]), j[c]);
        const auto y = lie_bracket(lie_bracket(j[b], j[c]), j[a]);
        const auto z = lie_bracket(lie_bracket(j[c], j[a]), j[b]);
        for (std::size_t mu = 0; mu < x.size(); ++mu)
          worst = std::max(worst, std::fabs(x[mu].value() + y[mu].value() + z[mu].value()));
      }
  return worst;
}

/// max |R^m_n - delta^m_n R/dim| / (1 + max |Riemann|).
inline double max_symmetry_residual(const MetricSpec& m, std::span<const double> p) {
  const Curvature cv = curvature(m.evaluate(p, 2));
  const int n = m.dim();
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double v = cv.ricci_mixed(a, b).value() - (a == b ? cv.scalar.value() / n : 0.0);
      worst = std::max(worst, std::fabs(v));
    }
  return worst / curvature_scale(cv);
}

/// Dimension of the solution space of L_xi (nabla^k Riemann) = 0, k = 0..depth,
/// in the prolonged unknowns (xi_a, L_ab = nabla_a xi_b antisymmetric) at p.
inline int killing_dimension_estimate(const MetricSpec& m, std::span<const double> p, int depth) {
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  const int order = 3 + depth;
  if (order > kMaxOrder)
    throw std::invalid_argument("depth " + std::to_string(depth) + " needs metric jets of order " +
                                std::to_string(order) + " (max " + std::to_string(kMaxOrder) + ")");
  const int n = m.dim();
  const Curvature cv = curvature(m.evaluate(p, order));
  const Connection& c = cv.conn;

  // covariant Riemann R_{rsmn} = g_{rl} R^l_{smn}
  std::vector<JetTensor> tower;
  {
    JetTensor low(n, 4, Jet::constant(0.0, n, order - 2));
    for (std::size_t flat = 0; flat < low.size(); ++flat) {
      const int r = static_cast<int>(flat / (n * n * n));
      const std::size_t rest = flat % (n * n * n);
      Jet s = Jet::constant(0.0, n, order - 2);
      for (int l = 0; l < n; ++l) s += c.g(r, l) * cv.riemann.at_flat(l * n * n * n + rest);
      low.at_flat(flat) = s;
    }
    tower.push_back(std::move(low));
  }
  for (int k = 0; k <= depth; ++k) tower.push_back(covariant_derivative_lower(tower.back(), c));

  // columns: xi_0..xi_{n-1}, then L_ab for a < b
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  const int cols = n + static_cast<int>(pairs.size());
  std::vector<std::vector<double>> rows;
  std::vector<double> ginv = c.ginv.values();
  double reference = 0.0;  // largest term before cancellation

  for (int k = 0; k <= depth; ++k) {
    const JetTensor& T = tower[k];
    const JetTensor& dT = tower[k + 1];
    const int rank = T.rank();
    std::vector<int> idx(rank);
    for (std::size_t flat = 0; flat < T.size(); ++flat) {
      std::size_t rem = flat;
      for (int i = rank - 1; i >= 0; --i) {
        idx[i] = static_cast<int>(rem % n);
        rem /= n;
      }
      std::vector<double> row(cols, 0.0);
      // xi^e nabla_e T with xi^e = g^{ef} xi_f
      for (int f = 0; f < n; ++f)
        for (int e = 0; e < n; ++e) {
          const double term = ginv[e * n + f] * dT.at_flat(e * T.size() + flat).value();
          row[f] += term;
          reference = std::max(reference, std::fabs(term));
        }
      // sum_i T_{..f..} nabla_{a_i} xi^f,  nabla_a xi^f = g^{fh} L_{ah}
      std::vector<double> lcoef(n * n, 0.0);  // coefficient of L_{ah}
      for (int i = 0; i < rank; ++i) {
        std::vector<int> j = idx;
        for (int f = 0; f < n; ++f) {
          j[i] = f;
          std::size_t fl = 0;
          for (int q = 0; q < rank; ++q) fl = fl * n + j[q];
          const double tv = T.at_flat(fl).value();
          if (tv == 0.0) continue;
          for (int h = 0; h < n; ++h) {
            lcoef[idx[i] * n + h] += tv * ginv[f * n + h];
            reference = std::max(reference, std::fabs(tv * ginv[f * n + h]));
          }
        }
      }
      for (std::size_t q = 0; q < pairs.size(); ++q) {
        const auto [a, b] = pairs[q];
        row[n + q] = lcoef[a * n + b] - lcoef[b * n + a];
      }
      rows.push_back(std::move(row));
    }
  }
  Eigen::MatrixXd a(static_cast<int>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int q = 0; q < cols; ++q) a(r, q) = rows[r][q];
  return cols - detail::numeric_rank(a, 1e-8, reference);
}

class InconsistentEstimate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Estimates at several points; they must agree.
inline int killing_dimension_consensus(const MetricSpec& m, const std::vector<std::vector<double>>& points, int depth,
                                       std::vector<int>* per_point = nullptr) {
  std::vector<int> dims;
  for (const auto& p : points) dims.push_back(killing_dimension_estimate(m, p, depth));
  if (per_point) *per_point = dims;
  for (int d : dims)
    if (d != dims.front()) {
      std::string msg = "Killing dimension differs between points:";
      for (int x : dims) msg += " " + std::to_string(x);
      throw InconsistentEstimate(msg);
    }
  return dims.empty() ? 0 : dims.front();
}

/// Three points inside the standard grid of a case, away from special values.
inline std::vector<std::vector<double>> generic_points(const SolutionCase& sc) {
  const Grid g = standard_grid(sc, GridKind::Fields3D);
  std::vector<std::vector<double>> out;
  const double fr[3][3] = {{0.31, 0.43, 0.57}, {0.62, 0.71, 0.23}, {0.17, 0.88, 0.69}};
  for (const auto& f : fr) {
    std::vector<double> p;
    for (int i = 0; i < 3; ++i) p.push_back(g.axes[i].lo + f[i] * (g.axes[i].hi - g.axes[i].lo));
    out.push_back(p);
  }
  return out;
}

}  // namespace cottonkit

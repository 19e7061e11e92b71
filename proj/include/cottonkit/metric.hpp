#pragma once

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cottonkit/expr.hpp"
#include "cottonkit/jet.hpp"

namespace cottonkit {

class DegenerateMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDegeneracyThreshold = 1e-12;

/// Dense tensor of jets with all indices running over 0..dim-1.
class JetTensor {
 public:
  JetTensor() = default;
  JetTensor(int dim, int rank, const Jet& fill) : dim_(dim), rank_(rank) {
    int n = 1;
    for (int r = 0; r < rank; ++r) n *= dim;
    data_.assign(n, fill);
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }

  template <class... I>
  Jet& operator()(I... idx) {
    return data_[flat(idx...)];
  }
  template <class... I>
  const Jet& operator()(I... idx) const {
    return data_[flat(idx...)];
  }
  Jet& at_flat(std::size_t i) { return data_[i]; }
  const Jet& at_flat(std::size_t i) const { return data_[i]; }

  /// Zero-order values, row-major.
  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(data_.size());
    for (const auto& j : data_) v.push_back(j.value());
    return v;
  }

  double max_abs_value() const {
    double m = 0.0;
    for (const auto& j : data_) m = std::max(m, std::fabs(j.value()));
    return m;
  }

 private:
  template <class... I>
  std::size_t flat(I... idx) const {
    std::size_t k = 0;
    ((k = k * dim_ + static_cast<std::size_t>(idx)), ...);
    return k;
  }

  int dim_ = 0;
  int rank_ = 0;
  std::vector<Jet> data_;
};

/// Metric components g_{mu nu} as jets at one point.
using MetricJet = JetTensor;

/// A metric written in the expression language: symmetric grid of component
/// expressions over named coordinates; missing entries are zero.
class MetricSpec {
 public:
  MetricSpec() = default;

  MetricSpec(std::vector<std::string> coordinates, ParamEnv env, int orientation = +1)
      : dim_(static_cast<int>(coordinates.size())),
        coordinates_(std::move(coordinates)),
        env_(std::move(env)),
        orientation_(orientation) {
    if (dim_ != 2 && dim_ != 3) throw std::invalid_argument("metric dimension must be 2 or 3");
    if (orientation_ != 1 && orientation_ != -1) throw std::invalid_argument("orientation must be +1 or -1");
    for (const auto& c : coordinates_)
      if (env_.count(c)) throw std::invalid_argument("parameter '" + c + "' clashes with a coordinate name");
    for (std::size_t i = 0; i < coordinates_.size(); ++i)
      for (std::size_t j = i + 1; j < coordinates_.size(); ++j)
        if (coordinates_[i] == coordinates_[j]) throw std::invalid_argument("duplicate coordinate name");
    components_.assign(dim_ * dim_, ExprAst(0.0));
  }

  /// Sets g_{ij} and g_{ji} to the same tree.
  MetricSpec& set(int i, int j, const ExprAst& e) {
    if (i < 0 || j < 0 || i >= dim_ || j >= dim_) throw std::out_of_range("metric component index");
    validate_symbols(e, coordinates_, env_);
    components_[i * dim_ + j] = e;
    components_[j * dim_ + i] = e;
    return *this;
  }
  MetricSpec& set(int i, int j, std::string_view text) { return set(i, j, parse_expr(text)); }

  int dim() const { return dim_; }
  const std::vector<std::string>& coordinates() const { return coordinates_; }
  const ParamEnv& env() const { return env_; }
  ParamEnv& env() { return env_; }
  int orientation() const { return orientation_; }
  const ExprAst& component(int i, int j) const { return components_[i * dim_ + j]; }

  int coordinate_index(const std::string& name) const {
    for (int i = 0; i < dim_; ++i)
      if (coordinates_[i] == name) return i;
    throw std::out_of_range("unknown coordinate '" + name + "'");
  }

  /// Component jets at `point` to the given order.
  MetricJet evaluate(std::span<const double> point, int order) const {
    const auto table = coordinate_jets(point, coordinates_, env_, order);
    MetricJet g(dim_, 2, Jet::constant(0.0, dim_, order));
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j) {
        const ExprAst& e = component(i, j);
        if (e.is_zero_literal()) continue;
        g(i, j) = eval_jet(e, table, dim_, order);
        g(j, i) = g(i, j);
      }
    return g;
  }

 private:
  int dim_ = 0;
  std::vector<std::string> coordinates_;
  std::vector<ExprAst> components_;
  ParamEnv env_;
  int orientation_ = +1;
};

/// Determinant of a 2x2 or 3x3 jet matrix.
inline Jet determinant(const JetTensor& g) {
  if (g.dim() == 2) return g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  return g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0)) +
         g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
}

/// Inverse by cofactors; throws DegenerateMetric when |det| <= 1e-12.
inline JetTensor inverse(const JetTensor& g, Jet* det_out = nullptr) {
  const Jet det = determinant(g);
  if (!(std::fabs(det.value()) > kDegeneracyThreshold))
    throw DegenerateMetric("degenerate metric: |det g| = " + std::to_string(std::fabs(det.value())));
  if (det_out) *det_out = det;
  const int n = g.dim();
  JetTensor inv(n, 2, det);
  if (n == 2) {
    inv(0, 0) = g(1, 1) / det;
    inv(1, 1) = g(0, 0) / det;
    inv(0, 1) = -g(0, 1) / det;
    inv(1, 0) = -g(1, 0) / det;
    return inv;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv(i, j) = (g(r0, c0) * g(r1, c1) - g(r0, c1) * g(r1, c0)) / det;
    }
  return inv;
}

}  // namespace cottonkit

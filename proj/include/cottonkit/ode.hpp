#pragma once

// Dormand-Prince 5(4) integrator with the standard continuous extension,
// plus a fixed-step mode used for convergence studies.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cottonkit::ode {

using State = std::vector<double>;
using Rhs = std::function<void(double x, const State& y, State& dydx)>;
/// Called after each accepted step; returning true stops the integration.
using StopFn = std::function<bool(double x, const State& y)>;

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  double atol = 1e-10;
  double rtol = 1e-10;
  double initial_step = 0.0;  // 0: automatic
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 1000000;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

namespace detail {

struct Tableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

struct StepResult {
  State y1, err;
  std::array<State, 7> k;
};

/// One step from (x, y) with k1 = f(x, y) already known. FSAL: k[6] = f(x+h, y1).
inline StepResult dp_step(const Rhs& f, double x, const State& y, const State& k1, double h, Stats& st) {
  using T = Tableau;
  const std::size_t n = y.size();
  StepResult r;
  r.k[0] = k1;
  for (auto& v : r.k) v.resize(n);
  State t(n);
  auto stage = [&](int s, double c, auto&& combo) {
    for (std::size_t i = 0; i < n; ++i) t[i] = y[i] + h * combo(i);
    f(x + c * h, t, r.k[s]);
    ++st.evaluations;
  };
  const auto& k = r.k;
  stage(1, T::c2, [&](std::size_t i) { return T::a21 * k[0][i]; });
  stage(2, T::c3, [&](std::size_t i) { return T::a31 * k[0][i] + T::a32 * k[1][i]; });
  stage(3, T::c4, [&](std::size_t i) { return T::a41 * k[0][i] + T::a42 * k[1][i] + T::a43 * k[2][i]; });
  stage(4, T::c5, [&](std::size_t i) {
    return T::a51 * k[0][i] + T::a52 * k[1][i] + T::a53 * k[2][i] + T::a54 * k[3][i];
  });
  stage(5, 1.0, [&](std::size_t i) {
    return T::a61 * k[0][i] + T::a62 * k[1][i] + T::a63 * k[2][i] + T::a64 * k[3][i] + T::a65 * k[4][i];
  });
  r.y1.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    r.y1[i] = y[i] + h * (T::a71 * k[0][i] + T::a73 * k[2][i] + T::a74 * k[3][i] + T::a75 * k[4][i] + T::a76 * k[5][i]);
  f(x + h, r.y1, r.k[6]);
  ++st.evaluations;
  r.err.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    r.err[i] = h * (T::e1 * k[0][i] + T::e3 * k[2][i] + T::e4 * k[3][i] + T::e5 * k[4][i] + T::e6 * k[5][i] +
                    T::e7 * k[6][i]);
  return r;
}

}  // namespace detail

/// Piecewise quartic interpolant over accepted steps.
class DenseSolution {
 public:
  struct Segment {
    double x0 = 0.0, h = 0.0;
    std::array<State, 5> r;
  };

  double x_begin() const { return x_begin_; }
  double x_end() const { return x_end_; }
  const State& final_state() const { return final_; }
  const Stats& stats() const { return stats_; }
  bool stopped_early() const { return stopped_; }
  std::size_t segments() const { return seg_.size(); }

  /// Interpolated state at x in [x_begin, x_end] (either direction).
  State operator()(double x) const {
    if (seg_.empty()) return final_;
    const bool fwd = x_end_ >= x_begin_;
    const double lo = std::min(x_begin_, x_end_), hi = std::max(x_begin_, x_end_);
    const double slack = 1e-12 * (1.0 + std::fabs(hi - lo));
    if (x < lo - slack || x > hi + slack)
      throw std::out_of_range("dense output requested at x=" + std::to_string(x) + " outside [" + std::to_string(lo) +
                              ", " + std::to_string(hi) + "]");
    // segments are ordered along the integration direction
    auto it = std::lower_bound(seg_.begin(), seg_.end(), x, [fwd](const Segment& s, double v) {
      return fwd ? s.x0 + s.h < v : s.x0 + s.h > v;
    });
    if (it == seg_.end()) it = std::prev(seg_.end());
    const double th = std::clamp((x - it->x0) / it->h, 0.0, 1.0), th1 = 1.0 - th;
    State y(it->r[0].size());
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] = it->r[0][i] + th * (it->r[1][i] + th1 * (it->r[2][i] + th * (it->r[3][i] + th1 * it->r[4][i])));
    return y;
  }

 private:
  friend DenseSolution integrate(const Rhs&, double, const State&, double, const Options&, const StopFn&);
  double x_begin_ = 0.0, x_end_ = 0.0;
  std::vector<Segment> seg_;
  State final_;
  Stats stats_;
  bool stopped_ = false;
};

/// Adaptive integration from x0 to x1 (x1 < x0 allowed). With `stop`, the
/// solution ends at the first accepted step for which it returns true.
inline DenseSolution integrate(const Rhs& f, double x0, const State& y0, double x1, const Options& opt,
                               const StopFn& stop = nullptr) {
  using T = detail::Tableau;
  DenseSolution sol;
  sol.x_begin_ = x0;
  sol.x_end_ = x0;
  sol.final_ = y0;
  if (x1 == x0) return sol;
  const double dir = x1 > x0 ? 1.0 : -1.0;
  const std::size_t n = y0.size();
  auto scale = [&](const State& a, const State& b, std::size_t i) {
    return opt.atol + opt.rtol * std::max(std::fabs(a[i]), std::fabs(b[i]));
  };
  auto norm = [&](const State& e, const State& a, const State& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::pow(e[i] / scale(a, b, i), 2);
    return std::sqrt(s / static_cast<double>(n));
  };

  State y = y0, k1(n);
  double x = x0;
  f(x, y, k1);
  ++sol.stats_.evaluations;

  double h = opt.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic
    const double d0 = norm(y, y, y), d1 = norm(k1, y, y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, std::fabs(x1 - x0));
    State y1(n), k2(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + dir * h0 * k1[i];
    f(x + dir * h0, y1, k2);
    ++sol.stats_.evaluations;
    State dk(n);
    for (std::size_t i = 0; i < n; ++i) dk[i] = k2[i] - k1[i];
    const double d2 = norm(dk, y, y) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min(100 * h0, h1);
  }
  h = std::min({h, opt.max_step, std::fabs(x1 - x0)});

  bool last_rejected = false;
  for (long steps = 0;; ++steps) {
    if (steps >= opt.max_steps) throw IntegrationError("step budget exhausted at x=" + std::to_string(x));
    const double remaining = std::fabs(x1 - x);
    bool last = false;
    if (h >= remaining * (1.0 - 1e-12)) {
      h = remaining;
      last = true;
    }
    if (h < 1e-14 * (1.0 + std::fabs(x))) throw IntegrationError("step size underflow at x=" + std::to_string(x));
    auto r = detail::dp_step(f, x, y, k1, dir * h, sol.stats_);
    double err = norm(r.err, y, r.y1);
    if (!std::isfinite(err)) err = 1e10;
    if (err <= 1.0) {
      DenseSolution::Segment s;
      s.x0 = x;
      s.h = dir * h;
      s.r[0] = y;
      s.r[1].resize(n);
      s.r[2].resize(n);
      s.r[3].resize(n);
      s.r[4].resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double hh = dir * h;
        s.r[1][i] = r.y1[i] - y[i];
        s.r[2][i] = hh * r.k[0][i] - s.r[1][i];
        s.r[3][i] = s.r[1][i] - hh * r.k[6][i] - s.r[2][i];
        s.r[4][i] = hh * (T::d1 * r.k[0][i] + T::d3 * r.k[2][i] + T::d4 * r.k[3][i] + T::d5 * r.k[4][i] +
                          T::d6 * r.k[5][i] + T::d7 * r.k[6][i]);
      }
      sol.seg_.push_back(std::move(s));
      x = last ? x1 : x + dir * h;
      y = r.y1;
      k1 = r.k[6];
      ++sol.stats_.accepted;
      sol.x_end_ = x;
      sol.final_ = y;
      for (double v : y)
        if (!std::isfinite(v)) throw IntegrationError("non-finite state at x=" + std::to_string(x));
      if (stop && stop(x, y)) {
        sol.stopped_ = true;
        return sol;
      }
      if (last) return sol;
      double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h = std::min(h * fac, opt.max_step);
      last_rejected = false;
    } else {
      ++sol.stats_.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      last_rejected = true;
    }
  }
}

/// Fixed-step fifth-order integration; returns the state at every node
/// x0 + i (x1 - x0)/steps. `stop` may end the run early (nodes so far).
inline std::vector<State> integrate_fixed(const Rhs& f, double x0, const State& y0, double x1, int steps,
                                          const StopFn& stop = nullptr) {
  if (steps < 1) throw std::invalid_argument("fixed-step integration needs at least one step");
  const double h = (x1 - x0) / steps;
  Stats st;
  std::vector<State> out{y0};
  State k1(y0.size());
  f(x0, y0, k1);
  for (int i = 0; i < steps; ++i) {
    const double x = x0 + i * h;
    auto r = detail::dp_step(f, x, out.back(), k1, h, st);
    k1 = r.k[6];
    out.push_back(std::move(r.y1));
    if (stop && stop(x0 + (i + 1) * h, out.back())) break;
  }
  return out;
}

}  // namespace cottonkit::ode

#pragma once

#include <chrono>
#include <cmath>
#include <charconv>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cottonkit {

/// Tensor-product grid over named axes.
struct Grid {
  struct Axis {
    std::string name;
    double lo = 0.0, hi = 0.0;
    int n = 1;
    double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
  };
  std::vector<Axis> axes;

  std::size_t size() const {
    std::size_t s = axes.empty() ? 0 : 1;
    for (const auto& a : axes) s *= static_cast<std::size_t>(a.n);
    return s;
  }

  /// Points in row-major order (last axis fastest).
  std::vector<std::vector<double>> points() const {
    std::vector<std::vector<double>> out;
    const std::size_t total = size();
    out.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
      std::vector<double> p(axes.size());
      std::size_t rem = k;
      for (int i = static_cast<int>(axes.size()) - 1; i >= 0; --i) {
        p[i] = axes[i].at(static_cast<int>(rem % axes[i].n));
        rem /= axes[i].n;
      }
      out.push_back(std::move(p));
    }
    return out;
  }

  std::string describe() const {
    std::string s;
    for (const auto& a : axes) {
      if (!s.empty()) s += ',';
      s += a.name + '=' + format(a.lo) + ':' + format(a.hi) + ':' + std::to_string(a.n);
    }
    return s;
  }

  static std::string format(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  }

  /// Parses "t=0.5:4:7,x=-2:2:7"; axes must match `coordinates` in order.
  static Grid parse(std::string_view spec, const std::vector<std::string>& coordinates) {
    Grid g;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      std::size_t comma = spec.find(',', pos);
      if (comma == std::string_view::npos) comma = spec.size();
      std::string_view item = spec.substr(pos, comma - pos);
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) throw std::invalid_argument("grid axis '" + std::string(item) + "' lacks '='");
      Axis a;
      a.name = std::string(item.substr(0, eq));
      std::string_view rest = item.substr(eq + 1);
      double nums[3];
      for (int k = 0; k < 3; ++k) {
        const std::size_t colon = k < 2 ? rest.find(':') : rest.size();
        if (colon == std::string_view::npos) throw std::invalid_argument("grid axis '" + a.name + "' needs lo:hi:n");
        std::string_view tok = rest.substr(0, colon);
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), nums[k]);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
          throw std::invalid_argument("bad number '" + std::string(tok) + "' in grid axis '" + a.name + "'");
        rest = colon < rest.size() ? rest.substr(colon + 1) : std::string_view{};
      }
      a.lo = nums[0];
      a.hi = nums[1];
      if (nums[2] < 1 || nums[2] != std::floor(nums[2])) throw std::invalid_argument("grid axis count must be a positive integer");
      a.n = static_cast<int>(nums[2]);
      g.axes.push_back(a);
      pos = comma + 1;
      if (comma == spec.size()) break;
    }
    if (g.axes.size() != coordinates.size()) throw std::invalid_argument("grid must list one axis per coordinate");
    for (std::size_t i = 0; i < coordinates.size(); ++i)
      if (g.axes[i].name != coordinates[i])
        throw std::invalid_argument("grid axis '" + g.axes[i].name + "' does not match coordinate '" + coordinates[i] + "'");
    return g;
  }
};

/// One named residual record.
struct CheckReport {
  std::string id;
  std::string case_tag;
  std::map<std::string, double> params;
  std::string grid;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<double> worst_point;
  double worst_value = 0.0;
  double wall_time = 0.0;
  std::map<std::string, double> details;
  std::string message;

  void finalize() { pass = std::isfinite(max_residual) && max_residual <= tolerance; }
};

/// Tracks the max residual and where it occurred. NaN is sticky.
class ResidualMax {
 public:
  void add(const std::vector<double>& point, double residual, double raw_value) {
    const double r = std::fabs(residual);
    if (std::isnan(residual)) {
      if (!nan_) {
        nan_ = true;
        worst_point_ = point;
        worst_value_ = raw_value;
      }
      return;
    }
    if (nan_) return;
    if (!any_ || r > max_) {
      max_ = r;
      worst_point_ = point;
      worst_value_ = raw_value;
    }
    any_ = true;
  }
  void add(const std::vector<double>& point, double residual) { add(point, residual, residual); }

  double max() const { return nan_ ? std::nan("") : max_; }

  void fill(CheckReport& r) const {
    r.max_residual = max();
    r.worst_point = worst_point_;
    r.worst_value = worst_value_;
    r.finalize();
  }

 private:
  double max_ = 0.0;
  bool any_ = false;
  bool nan_ = false;
  std::vector<double> worst_point_;
  double worst_value_ = 0.0;
};

/// Least-squares slope of log(error) against log(step).
inline double fitted_order(const std::vector<double>& steps, const std::vector<double>& errors) {
  if (steps.size() != errors.size() || steps.size() < 2) throw std::invalid_argument("order fit needs >= 2 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double a = std::log(steps[i]), b = std::log(errors[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace cottonkit

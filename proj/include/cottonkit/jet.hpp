#pragma once

// Truncated multivariate Taylor jets.
//
// A Jet holds the Taylor coefficients  d^alpha f / alpha!  of a function of up
// to three variables, for every multi-index with |alpha| <= order. Arithmetic
// on jets is exact up to truncation, so composing closed-form expressions over
// coordinate jets yields exact partial derivatives of the composition.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cottonkit {

inline constexpr int kMaxVars = 3;
inline constexpr int kMaxOrder = 5;
inline constexpr int kMaxCoeffs = 56;  // C(3 + 5, 5)

using MultiIndex = std::array<int, kMaxVars>;

/// Raised when an elementary function is evaluated outside its real domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

constexpr int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

constexpr int jet_size(int num_vars, int order) {
  return binomial(num_vars + order, order);
}

namespace detail {

// Graded enumeration of multi-indices for a fixed number of variables. The
// enumeration for order k is a prefix of the one for order k + 1, so
// truncation is a prefix copy and index tables depend only on num_vars.
struct JetTable {
  struct Triple {
    int lhs, rhs, out;
  };

  int num_vars = 0;
  std::vector<MultiIndex> multi;
  std::array<int, 6 * 6 * 6> lookup{};
  std::vector<Triple> products;                      // sorted by |out|
  std::array<std::size_t, kMaxOrder + 1> product_end{};  // triples with |out| <= k
  std::array<std::array<int, kMaxCoeffs>, kMaxVars> raise{};  // index of alpha + e_v
  std::array<double, kMaxCoeffs> alpha_factorial{};

  static int key(const MultiIndex& a) { return (a[0] * 6 + a[1]) * 6 + a[2]; }

  explicit JetTable(int nv) : num_vars(nv) {
    lookup.fill(-1);
    for (int deg = 0; deg <= kMaxOrder; ++deg) {
      for (int a0 = deg; a0 >= 0; --a0) {
        if (nv == 1) {
          if (a0 == deg) multi.push_back({a0, 0, 0});
          continue;
        }
        for (int a1 = deg - a0; a1 >= 0; --a1) {
          const int a2 = deg - a0 - a1;
          if (nv == 2 && a2 != 0) continue;
          multi.push_back({a0, a1, a2});
        }
      }
    }
    for (std::size_t i = 0; i < multi.size(); ++i) {
      lookup[key(multi[i])] = static_cast<int>(i);
      const auto& a = multi[i];
      double f = 1.0;
      for (int v = 0; v < kMaxVars; ++v)
        for (int k = 2; k <= a[v]; ++k) f *= k;
      alpha_factorial[i] = f;
    }
    for (auto& r : raise) r.fill(-1);
    for (std::size_t i = 0; i < multi.size(); ++i) {
      for (int v = 0; v < nv; ++v) {
        MultiIndex b = multi[i];
        ++b[v];
        if (b[0] + b[1] + b[2] <= kMaxOrder) raise[v][i] = lookup[key(b)];
      }
    }
    for (int deg = 0; deg <= kMaxOrder; ++deg) {
      for (std::size_t i = 0; i < multi.size(); ++i) {
        for (std::size_t j = 0; j < multi.size(); ++j) {
          MultiIndex s{multi[i][0] + multi[j][0], multi[i][1] + multi[j][1],
                       multi[i][2] + multi[j][2]};
          if (s[0] + s[1] + s[2] != deg) continue;
          products.push_back({static_cast<int>(i), static_cast<int>(j), lookup[key(s)]});
        }
      }
      product_end[deg] = products.size();
    }
  }
};

inline const JetTable& jet_table(int num_vars) {
  static const std::array<JetTable, 3> tables{JetTable(1), JetTable(2), JetTable(3)};
  return tables[num_vars - 1];
}

}  // namespace detail

/// Elementary functions a jet can be pushed through.
enum class UnaryFn { Tanh, Cosh, Sinh, Exp, Ln, Sqrt, Sin, Cos, Arctan };

inline const char* to_string(UnaryFn fn) {
  switch (fn) {
    case UnaryFn::Tanh: return "tanh";
    case UnaryFn::Cosh: return "cosh";
    case UnaryFn::Sinh: return "sinh";
    case UnaryFn::Exp: return "exp";
    case UnaryFn::Ln: return "ln";
    case UnaryFn::Sqrt: return "sqrt";
    case UnaryFn::Sin: return "sin";
    case UnaryFn::Cos: return "cos";
    case UnaryFn::Arctan: return "arctan";
  }
  return "?";
}

class Jet {
 public:
  Jet() = default;

  static Jet constant(double value, int num_vars, int order) {
    Jet j(num_vars, order);
    j.c_[0] = value;
    return j;
  }

  static Jet variable(int index, double value, int num_vars, int order) {
    if (index < 0 || index >= num_vars)
      throw std::out_of_range("jet variable index " + std::to_string(index) +
                              " out of range for " + std::to_string(num_vars) +
                              " variables");
    Jet j(num_vars, order);
    j.c_[0] = value;
    if (order >= 1) {
      MultiIndex e{0, 0, 0};
      e[index] = 1;
      j.c_[j.table().lookup[detail::JetTable::key(e)]] = 1.0;
    }
    return j;
  }

  int num_vars() const { return num_vars_; }
  int order() const { return order_; }
  int size() const { return jet_size(num_vars_, order_); }
  double value() const { return c_[0]; }

  std::span<const double> coefficients() const {
    return {c_.data(), static_cast<std::size_t>(size())};
  }
  const MultiIndex& multi_index(int i) const { return table().multi[i]; }

  double coeff(const MultiIndex& alpha) const {
    const int i = index_of(alpha);
    return c_[i];
  }
  double& coeff_ref(int i) { return c_[i]; }
  double coeff(int i) const { return c_[i]; }

  /// d^alpha f at the expansion point.
  double partial(const MultiIndex& alpha) const {
    const int i = index_of(alpha);
    return c_[i] * table().alpha_factorial[i];
  }

  bool is_constant() const {
    for (int i = 1; i < size(); ++i)
      if (c_[i] != 0.0) return false;
    return true;
  }

  /// Jet of d f / d x_var, one order lower.
  Jet derivative(int var) const {
    if (order_ == 0) throw std::logic_error("jet order exhausted: cannot differentiate an order-0 jet");
    if (var < 0 || var >= num_vars_) throw std::out_of_range("jet derivative variable out of range");
    Jet d(num_vars_, order_ - 1);
    const auto& t = table();
    for (int i = 0; i < d.size(); ++i) {
      const int up = t.raise[var][i];
      d.c_[i] = (t.multi[i][var] + 1) * c_[up];
    }
    return d;
  }

  Jet truncated(int order) const {
    if (order >= order_) return *this;
    Jet r(num_vars_, order);
    for (int i = 0; i < r.size(); ++i) r.c_[i] = c_[i];
    return r;
  }

  Jet operator-() const {
    Jet r = *this;
    for (int i = 0; i < size(); ++i) r.c_[i] = -r.c_[i];
    return r;
  }

  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    c_[0] -= s;
    return *this;
  }
  Jet& operator*=(double s) {
    for (int i = 0; i < size(); ++i) c_[i] *= s;
    return *this;
  }
  Jet& operator/=(double s) {
    for (int i = 0; i < size(); ++i) c_[i] /= s;
    return *this;
  }

  Jet& operator+=(const Jet& o) {
    check_compatible(o);
    order_ = std::min(order_, o.order_);
    for (int i = 0; i < size(); ++i) c_[i] += o.c_[i];
    zero_tail();
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    check_compatible(o);
    order_ = std::min(order_, o.order_);
    for (int i = 0; i < size(); ++i) c_[i] -= o.c_[i];
    zero_tail();
    return *this;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    a.check_compatible(b);
    Jet r(a.num_vars_, std::min(a.order_, b.order_));
    const auto& t = a.table();
    const std::size_t n = t.product_end[r.order_];
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = t.products[k];
      r.c_[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    a.check_compatible(b);
    if (b.c_[0] == 0.0) throw DomainError("division by a jet with zero value");
    Jet r(a.num_vars_, std::min(a.order_, b.order_));
    const auto& t = a.table();
    const std::size_t n = t.product_end[r.order_];
    // q * b = a, solved degree by degree; triples are graded by |out|.
    (void)n;
    std::array<double, kMaxCoeffs> acc{};
    std::size_t k = 0;
    for (int deg = 0; deg <= r.order_; ++deg) {
      const std::size_t end = t.product_end[deg];
      // every triple of this degree with rhs != 0 has |lhs| < deg, already solved
      for (std::size_t m = k; m < end; ++m) {
        const auto& p = t.products[m];
        if (p.rhs != 0) acc[p.out] += r.c_[p.lhs] * b.c_[p.rhs];
      }
      for (std::size_t m = k; m < end; ++m) {
        const auto& p = t.products[m];
        if (p.rhs == 0) r.c_[p.out] = (a.c_[p.out] - acc[p.out]) / b.c_[0];
      }
      k = end;
    }
    return r;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator/(double s, const Jet& a) {
    return Jet::constant(s, a.num_vars_, a.order_) / a;
  }

 private:
  Jet(int num_vars, int order) : num_vars_(num_vars), order_(order) {
    if (num_vars < 1 || num_vars > kMaxVars)
      throw std::invalid_argument("jet num_vars must be 1..3");
    if (order < 0 || order > kMaxOrder)
      throw std::invalid_argument("jet order must be 0.." + std::to_string(kMaxOrder));
  }

  const detail::JetTable& table() const { return detail::jet_table(num_vars_); }

  int index_of(const MultiIndex& alpha) const {
    int total = 0;
    for (int v = 0; v < kMaxVars; ++v) {
      if (alpha[v] < 0 || (v >= num_vars_ && alpha[v] != 0))
        throw std::out_of_range("multi-index does not match jet variables");
      total += alpha[v];
    }
    if (total > order_)
      throw std::out_of_range("multi-index order " + std::to_string(total) +
                              " exceeds jet order " + std::to_string(order_));
    return table().lookup[detail::JetTable::key(alpha)];
  }

  void check_compatible(const Jet& o) const {
    if (num_vars_ != o.num_vars_) throw std::invalid_argument("jets over different variable counts");
  }

  void zero_tail() {
    for (int i = size(); i < kMaxCoeffs; ++i) c_[i] = 0.0;
  }

  int num_vars_ = 1;
  int order_ = 0;
  std::array<double, kMaxCoeffs> c_{};
};

namespace detail {

using Series = std::array<double, kMaxOrder + 1>;

inline Series series_mul(const Series& a, const Series& b, int n) {
  Series r{};
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline Series series_div(const Series& a, const Series& b, int n) {
  Series r{};
  for (int k = 0; k <= n; ++k) {
    double s = a[k];
    for (int j = 1; j <= k; ++j) s -= r[k - j] * b[j];
    r[k] = s / b[0];
  }
  return r;
}

// Coefficients fn^(k)(a) / k! for k = 0..n.
inline Series taylor_coefficients(UnaryFn fn, double a, int n) {
  Series c{};
  double fact = 1.0;
  auto cyc = [&](double d0, double d1, double d2, double d3) {
    const double d[4] = {d0, d1, d2, d3};
    fact = 1.0;
    for (int k = 0; k <= n; ++k) {
      if (k > 0) fact *= k;
      c[k] = d[k % 4] / fact;
    }
  };
  switch (fn) {
    case UnaryFn::Exp: {
      const double e = std::exp(a);
      for (int k = 0; k <= n; ++k) {
        if (k > 0) fact *= k;
        c[k] = e / fact;
      }
      break;
    }
    case UnaryFn::Ln: {
      if (!(a > 0.0)) throw DomainError("ln: argument " + std::to_string(a) + " outside domain (must be > 0)");
      c[0] = std::log(a);
      double p = 1.0;
      for (int k = 1; k <= n; ++k) {
        p *= a;
        c[k] = ((k % 2) ? 1.0 : -1.0) / (k * p);
      }
      break;
    }
    case UnaryFn::Sqrt: {
      if (a < 0.0 || (a == 0.0 && n > 0))
        throw DomainError("sqrt: argument " + std::to_string(a) + " outside domain (must be > 0)");
      c[0] = std::sqrt(a);
      double binom = 1.0;
      for (int k = 1; k <= n; ++k) {
        binom *= (0.5 - (k - 1)) / k;
        c[k] = c[0] * binom / std::pow(a, k);
      }
      break;
    }
    case UnaryFn::Sin: cyc(std::sin(a), std::cos(a), -std::sin(a), -std::cos(a)); break;
    case UnaryFn::Cos: cyc(std::cos(a), -std::sin(a), -std::cos(a), std::sin(a)); break;
    case UnaryFn::Sinh: cyc(std::sinh(a), std::cosh(a), std::sinh(a), std::cosh(a)); break;
    case UnaryFn::Cosh: cyc(std::cosh(a), std::sinh(a), std::cosh(a), std::sinh(a)); break;
    case UnaryFn::Tanh: {
      const Series s = taylor_coefficients(UnaryFn::Sinh, a, n);
      const Series ch = taylor_coefficients(UnaryFn::Cosh, a, n);
      c = series_div(s, ch, n);
      c[0] = std::tanh(a);
      break;
    }
    case UnaryFn::Arctan: {
      // d/du arctan(a + u) = 1 / (1 + (a + u)^2), integrated term by term
      Series one{}, den{};
      one[0] = 1.0;
      den[0] = 1.0 + a * a;
      if (n >= 1) den[1] = 2.0 * a;
      if (n >= 2) den[2] = 1.0;
      const Series d = series_div(one, den, n);
      c[0] = std::atan(a);
      for (int k = 1; k <= n; ++k) c[k] = d[k - 1] / k;
      break;
    }
  }
  return c;
}

}  // namespace detail

/// Jet of fn composed with j, exact to j's truncation order.
inline Jet apply(UnaryFn fn, const Jet& j) {
  const int n = j.order();
  const detail::Series c = detail::taylor_coefficients(fn, j.value(), n);
  Jet u = j;
  u -= j.value();
  Jet r = Jet::constant(c[n], j.num_vars(), n);
  for (int k = n - 1; k >= 0; --k) r = r * u + c[k];
  return r;
}

inline Jet tanh(const Jet& j) { return apply(UnaryFn::Tanh, j); }
inline Jet cosh(const Jet& j) { return apply(UnaryFn::Cosh, j); }
inline Jet sinh(const Jet& j) { return apply(UnaryFn::Sinh, j); }
inline Jet exp(const Jet& j) { return apply(UnaryFn::Exp, j); }
inline Jet log(const Jet& j) { return apply(UnaryFn::Ln, j); }
inline Jet sqrt(const Jet& j) { return apply(UnaryFn::Sqrt, j); }
inline Jet sin(const Jet& j) { return apply(UnaryFn::Sin, j); }
inline Jet cos(const Jet& j) { return apply(UnaryFn::Cos, j); }
inline Jet atan(const Jet& j) { return apply(UnaryFn::Arctan, j); }

/// Repeated multiplication; shared by the jet and the plain-real evaluators so
/// both paths round identically.
template <class T>
T integer_power(const T& base, long n, const T& one) {
  if (n == 0) return one;
  const bool neg = n < 0;
  if (neg) n = -n;
  T r = base;
  for (long k = 1; k < n; ++k) r = r * base;
  if (neg) return one / r;
  return r;
}

inline double apply(UnaryFn fn, double x) {
  switch (fn) {
    case UnaryFn::Tanh: return std::tanh(x);
    case UnaryFn::Cosh: return std::cosh(x);
    case UnaryFn::Sinh: return std::sinh(x);
    case UnaryFn::Exp: return std::exp(x);
    case UnaryFn::Ln:
      if (!(x > 0.0)) throw DomainError("ln: argument " + std::to_string(x) + " outside domain (must be > 0)");
      return std::log(x);
    case UnaryFn::Sqrt:
      if (x < 0.0) throw DomainError("sqrt: argument " + std::to_string(x) + " outside domain (must be > 0)");
      return std::sqrt(x);
    case UnaryFn::Sin: return std::sin(x);
    case UnaryFn::Cos: return std::cos(x);
    case UnaryFn::Arctan: return std::atan(x);
  }
  return 0.0;
}

/// Integer exponents by repeated multiplication, everything else through
/// exp(e * ln(b)).
inline bool is_integer_exponent(double e) {
  return std::isfinite(e) && std::floor(e) == e && std::fabs(e) <= 64.0;
}

inline Jet pow(const Jet& base, const Jet& exponent) {
  if (exponent.is_constant() && is_integer_exponent(exponent.value())) {
    if (exponent.value() < 0 && base.value() == 0.0) throw DomainError("pow: zero base with negative exponent");
    return integer_power(base, static_cast<long>(exponent.value()),
                         Jet::constant(1.0, base.num_vars(), base.order()));
  }
  return exp(exponent * log(base));
}

inline Jet pow(const Jet& base, double e) {
  return pow(base, Jet::constant(e, base.num_vars(), base.order()));
}

inline double pow_real(double base, double e) {
  if (is_integer_exponent(e)) {
    if (e < 0 && base == 0.0) throw DomainError("pow: zero base with negative exponent");
    return integer_power(base, static_cast<long>(e), 1.0);
  }
  return std::exp(e * apply(UnaryFn::Ln, base));
}

}  // namespace cottonkit

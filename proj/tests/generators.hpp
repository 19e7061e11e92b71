#pragma once

// Random inputs shared by the unit tests and the acceptance binary.

#include <random>
#include <string>
#include <vector>

#include "cottonkit/expr.hpp"
#include "cottonkit/metric.hpp"

namespace gen {

using cottonkit::ExprAst;
using cottonkit::UnaryFn;

inline const std::vector<std::string>& coords3() {
  static const std::vector<std::string> c{"t", "x", "y"};
  return c;
}

/// Compositions of elementary functions whose arguments stay inside the
/// real domain for any real input.
class Compositions {
 public:
  explicit Compositions(unsigned seed, int num_vars = 3) : rng_(seed), nv_(num_vars) {}

  ExprAst next(int depth = 4) { return node(depth); }

  std::vector<double> point() {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> p(nv_);
    for (auto& v : p) v = u(rng_);
    return p;
  }

 private:
  ExprAst leaf() {
    std::uniform_int_distribution<int> pick(0, nv_);
    const int k = pick(rng_);
    if (k < nv_) return ExprAst::symbol(coords3()[k]);
    std::uniform_real_distribution<double> c(0.5, 2.0);
    return ExprAst(std::round(c(rng_) * 100) / 100);
  }

  ExprAst node(int depth) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (depth == 0 || u(rng_) < 0.2) return leaf();
    std::uniform_int_distribution<int> op(0, 15);
    auto call = [](UnaryFn fn, const ExprAst& a) { return ExprAst::call(fn, a); };
    switch (op(rng_)) {
      case 0: return node(depth - 1) + node(depth - 1);
      case 1: return node(depth - 1) - node(depth - 1);
      case 2: return node(depth - 1) * node(depth - 1);
      case 3: return node(depth - 1) / (ExprAst(2.0) + call(UnaryFn::Sin, node(depth - 1)));
      case 4: return call(UnaryFn::Tanh, node(depth - 1));
      case 5: return call(UnaryFn::Cosh, ExprAst(0.5) * node(depth - 1));
      case 6: return call(UnaryFn::Sinh, ExprAst(0.5) * node(depth - 1));
      case 7: return call(UnaryFn::Exp, ExprAst(0.3) * call(UnaryFn::Tanh, node(depth - 1)));
      case 8: return call(UnaryFn::Ln, ExprAst(2.0) + call(UnaryFn::Cos, node(depth - 1)));
      case 9: return call(UnaryFn::Sqrt, ExprAst(1.5) + call(UnaryFn::Sin, node(depth - 1)));
      case 10: return call(UnaryFn::Sin, node(depth - 1));
      case 11: return call(UnaryFn::Cos, node(depth - 1));
      case 12: return call(UnaryFn::Arctan, node(depth - 1));
      case 13: return cottonkit::pow(node(depth - 1), ExprAst(u(rng_) < 0.5 ? 2.0 : 3.0));
      case 14:
        return cottonkit::pow(ExprAst(1.5) + call(UnaryFn::Cos, node(depth - 1)), ExprAst(u(rng_) < 0.5 ? 0.7 : -1.3));
      default: return -node(depth - 1);
    }
  }

  std::mt19937_64 rng_;
  int nv_;
};

/// Random expression trees for printer/parser round trips, including
/// negative literals, nested unary minus and power towers.
class PrintCorpus {
 public:
  explicit PrintCorpus(unsigned seed) : rng_(seed) {}

  ExprAst next(int depth = 5) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (depth == 0 || u(rng_) < 0.15) {
      const double r = u(rng_);
      if (r < 0.3) return ExprAst::symbol(names_[static_cast<int>(u(rng_) * names_.size()) % names_.size()]);
      std::uniform_int_distribution<int> k(-300, 300);
      const double v = k(rng_) / (u(rng_) < 0.5 ? 1.0 : 16.0);
      return ExprAst(r < 0.9 ? std::fabs(v) : v);
    }
    std::uniform_int_distribution<int> op(0, 9);
    static constexpr UnaryFn fns[] = {UnaryFn::Tanh, UnaryFn::Cosh, UnaryFn::Sinh, UnaryFn::Exp, UnaryFn::Ln,
                                      UnaryFn::Sqrt, UnaryFn::Sin,  UnaryFn::Cos,  UnaryFn::Arctan};
    switch (op(rng_)) {
      case 0: return next(depth - 1) + next(depth - 1);
      case 1: return next(depth - 1) - next(depth - 1);
      case 2: return next(depth - 1) * next(depth - 1);
      case 3: return next(depth - 1) / next(depth - 1);
      case 4:
      case 5: return cottonkit::pow(next(depth - 1), next(depth - 1));
      case 6: return -next(depth - 1);
      default: return ExprAst::call(fns[static_cast<int>(u(rng_) * 9) % 9], next(depth - 1));
    }
  }

 private:
  std::mt19937_64 rng_;
  std::vector<std::string> names_{"t", "x", "y", "C", "phi", "alpha_2"};
};

/// Flat 3D metric plus a smooth random perturbation of size ~eps.
inline cottonkit::MetricSpec random_metric(std::mt19937_64& rng, double eps = 0.1) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  cottonkit::MetricSpec m(coords3(), {});
  const double eta[3] = {1.0, -1.0, -1.0};
  auto num = [&](double v) { return "(" + cottonkit::detail::format_number(std::round(v * 1000) / 1000) + ")"; };
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      std::string e = i == j ? cottonkit::detail::format_number(eta[i]) : "0";
      e += "+" + num(eps * u(rng)) + "*sin(" + num(u(rng)) + "*t+" + num(u(rng)) + "*x+" + num(u(rng)) + "*y+" +
           num(u(rng)) + ")";
      e += "+" + num(eps * u(rng)) + "*tanh(" + num(u(rng)) + "*t*x+" + num(u(rng)) + "*y)";
      e += "+" + num(eps * u(rng) / 2) + "*exp(" + num(u(rng) / 2) + "*(t+y)^2)";
      m.set(i, j, e);
    }
  return m;
}

inline std::vector<double> random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace gen

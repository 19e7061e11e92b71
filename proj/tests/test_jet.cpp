#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "cottonkit/expr.hpp"
#include "cottonkit/jet.hpp"
#include "fd_oracle.hpp"
#include "generators.hpp"

using namespace cottonkit;
using Catch::Approx;

TEST_CASE("variables and constants") {
  const Jet v = Jet::variable(0, 2.0, 2, 4);
  CHECK(v.value() == 2.0);
  CHECK(v.partial({1, 0, 0}) == 1.0);
  CHECK(v.partial({0, 1, 0}) == 0.0);
  CHECK(v.partial({2, 0, 0}) == 0.0);
  CHECK(v.size() == 15);

  const Jet w = Jet::variable(1, 0.0, 3, 4);
  CHECK(w.value() == 0.0);
  CHECK(w.partial({0, 1, 0}) == 1.0);
  CHECK(w.size() == 35);

  const Jet c = Jet::constant(5.0, 3, 4);
  CHECK(c.value() == 5.0);
  CHECK(c.is_constant());

  CHECK_THROWS_AS(Jet::variable(2, 0.0, 2, 4), std::out_of_range);
  CHECK_THROWS_AS(v.partial({3, 2, 0}), std::out_of_range);
  CHECK(Jet::variable(0, 0.0, 3, 5).size() == 56);
}

TEST_CASE("extraction of partials") {
  const Jet t = Jet::variable(0, 1.0, 2, 4);
  const Jet x = Jet::variable(1, 0.3, 2, 4);
  const Jet cube = t * t * t;
  CHECK(cube.partial({2, 0, 0}) == Approx(6.0));
  CHECK(cube.partial({3, 0, 0}) == Approx(6.0));
  CHECK(cube.partial({4, 0, 0}) == Approx(0.0).margin(1e-15));
  CHECK((t * x).partial({1, 1, 0}) == 1.0);
}

TEST_CASE("tanh series") {
  const Jet x = Jet::variable(0, 0.0, 1, 3);
  const Jet th = tanh(x);
  CHECK(th.coeff(0) == Approx(0.0).margin(1e-16));
  CHECK(th.coeff(1) == Approx(1.0));
  CHECK(th.coeff(2) == Approx(0.0).margin(1e-16));
  CHECK(th.coeff(3) == Approx(-1.0 / 3.0));

  // against a 4th-order central difference of tanh at 0, step 1e-3
  const double h = 1e-3;
  auto f = [](double s) { return std::tanh(s); };
  const double fd3 = (-f(3 * h) + 8 * f(2 * h) - 13 * f(h) + 13 * f(-h) - 8 * f(-2 * h) + f(-3 * h)) / (8 * h * h * h);
  const double fd1 = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
  CHECK(std::fabs(th.partial({1, 0, 0}) - fd1) < 1e-8);
  CHECK(std::fabs(th.partial({3, 0, 0}) - fd3) < 1e-6);
  CHECK(th.partial({3, 0, 0}) == Approx(-2.0));
}

TEST_CASE("elementary identities") {
  const Jet zero = Jet::constant(0.0, 2, 4);
  const Jet e = exp(zero);
  CHECK(e.value() == 1.0);
  CHECK(e.is_constant());

  const Jet x = Jet::variable(0, 2.0, 1, 4);
  const Jet s = sqrt(x * x);
  CHECK(s.value() == Approx(2.0));
  CHECK(s.partial({1, 0, 0}) == Approx(1.0));
  CHECK(s.partial({2, 0, 0}) == Approx(0.0).margin(1e-14));

  CHECK_THROWS_AS(sqrt(-x), DomainError);
  CHECK_THROWS_AS(log(x - 3.0), DomainError);
  CHECK_THROWS_AS(x / (x - 2.0), DomainError);

  // negative base with integer exponent stays on the multiplication path
  const Jet neg = pow(-x, 3.0);
  CHECK(neg.value() == Approx(-8.0));
  CHECK(neg.partial({1, 0, 0}) == Approx(-12.0));
  CHECK_THROWS_AS(pow(-x, 0.5), DomainError);
}

TEST_CASE("product rule is the truncated Cauchy product") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Jet a = Jet::constant(0.0, 3, 4), b = Jet::constant(0.0, 3, 4);
    for (int i = 0; i < a.size(); ++i) {
      a.coeff_ref(i) = u(rng);
      b.coeff_ref(i) = u(rng);
    }
    const Jet p = a * b;
    for (int i = 0; i < p.size(); ++i) {
      const MultiIndex g = p.multi_index(i);
      double s = 0.0;
      for (int j = 0; j < a.size(); ++j)
        for (int k = 0; k < b.size(); ++k) {
          const MultiIndex aj = a.multi_index(j), bk = b.multi_index(k);
          if (aj[0] + bk[0] == g[0] && aj[1] + bk[1] == g[1] && aj[2] + bk[2] == g[2]) s += a.coeff(j) * b.coeff(k);
        }
      CHECK(std::fabs(p.coeff(i) - s) <= 1e-14 * (1.0 + std::fabs(s)));
    }
  }
}

TEST_CASE("division round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Jet f = Jet::constant(0.0, 3, 4), g = Jet::constant(0.0, 3, 4);
    for (int i = 0; i < f.size(); ++i) {
      f.coeff_ref(i) = u(rng);
      g.coeff_ref(i) = u(rng);
    }
    g.coeff_ref(0) = (u(rng) < 0 ? -1 : 1) * (0.1 + std::fabs(g.coeff(0)));
    const Jet back = (f / g) * g;
    double scale = 0.0;
    for (int i = 0; i < f.size(); ++i) scale = std::max(scale, std::fabs(f.coeff(i)));
    for (int i = 0; i < f.size(); ++i) CHECK(std::fabs(back.coeff(i) - f.coeff(i)) <= 1e-13 * (1.0 + scale) * 100);
  }
}

TEST_CASE("order bookkeeping") {
  const Jet x = Jet::variable(0, 0.5, 2, 4);
  const Jet d = sin(x).derivative(0);
  CHECK(d.order() == 3);
  CHECK(d.value() == Approx(std::cos(0.5)));
  CHECK(d.partial({1, 0, 0}) == Approx(-std::sin(0.5)));
  CHECK_THROWS_AS(Jet::constant(1.0, 2, 0).derivative(0), std::logic_error);
  const Jet mixed = x + Jet::variable(1, 0.1, 2, 2);
  CHECK(mixed.order() == 2);
}

TEST_CASE("random compositions against quad-precision finite differences") {
  gen::Compositions g(2024);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ExprAst e = g.next();
    const auto p = g.point();
    const Jet j = eval_jet(e, p, gen::coords3(), {}, 4);
    oracle::ScalarFn f = [&](const oracle::Point& q) {
      return oracle::eval(e.node(), {{"t", q[0]}, {"x", q[1]}, {"y", q[2]}});
    };
    const auto P = oracle::to_point(p);
    for (int i = 0; i < j.size(); ++i) {
      const MultiIndex a = j.multi_index(i);
      const double ref = static_cast<double>(oracle::partial(f, P, a, oracle::kStep));
      const double got = j.partial(a);
      INFO(to_string(e) << " alpha=" << a[0] << a[1] << a[2]);
      CHECK(std::fabs(got - ref) <= 1e-6 * std::max({1.0, std::fabs(ref), std::fabs(got)}));
      ++checked;
    }
  }
  CHECK(checked == 200 * 35);
}

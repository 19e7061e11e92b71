#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "cottonkit/catalog.hpp"
#include "cottonkit/geometry.hpp"
#include "fd_oracle.hpp"
#include "generators.hpp"

using namespace cottonkit;
using Catch::Approx;

namespace {

MetricSpec flat3() {
  MetricSpec m({"t", "x", "y"}, {});
  m.set(0, 0, "1").set(1, 1, "-1").set(2, 2, "-1");
  return m;
}

double rel_err(double got, double ref, double scale) { return std::fabs(got - ref) / std::max(1.0, scale); }

}  // namespace

TEST_CASE("flat space has no connection or curvature") {
  const MetricSpec m = flat3();
  const std::vector<double> p{0.3, -0.2, 1.1};
  const CurvatureAt c = curvature_at(m, p);
  for (double v : c.gamma) CHECK(v == 0.0);
  for (double v : c.riemann) CHECK(v == 0.0);
  const CottonAt ct = cotton_at(m, p);
  CHECK(ct.max_abs() == 0.0);
  const CottonIdentities id = cotton_identities_at(m, p);
  CHECK(id.trace == 0.0);
  CHECK(id.asymmetry == 0.0);
  CHECK(id.divergence == 0.0);
}

TEST_CASE("case (a) Christoffel and calibration") {
  const Solution2D s = solution_2d({CaseTag::A, 2.0});
  const std::vector<double> p{2.0, 0.0};
  const CurvatureAt c = christoffel_at(s.rd.g2, p);
  CHECK(c.christoffel(0, 0, 0) == Approx(-0.5));
  oracle::Metric om(s.rd.g2);
  const auto G = oracle::christoffel(om, oracle::to_point(p));
  for (std::size_t i = 0; i < G.size(); ++i) CHECK(std::fabs(c.gamma[i] - static_cast<double>(G[i])) < 1e-9);

  for (double C : {0.25, 1.0, 9.0}) {
    const SolutionCase sc(CaseTag::A, C);
    const Solution2D s2 = solution_2d(sc);
    for (const auto& q : standard_grid(sc, GridKind::Fields2D).points()) {
      const CurvatureAt cv = curvature_at(s2.rd.g2, q);
      CHECK(std::fabs(cv.scalar - C) <= 1e-9 * C);
    }
  }
  CHECK(curvature_at(solution_2d({CaseTag::A, 2.0}).rd.g2, std::vector<double>{1.0, 0.0}).scalar == Approx(2.0));
}

TEST_CASE("kink metric is stationary at x = 0") {
  const Solution2D s = solution_2d({CaseTag::KinkPlus, 1.0});
  const CurvatureAt c = christoffel_at(s.rd.g2, std::vector<double>{0.4, 0.0});
  for (double v : c.gamma) CHECK(std::fabs(v) < 1e-15);
}

TEST_CASE("case (c) scalar curvature") {
  const Solution3D s = solution_3d({CaseTag::Cplus, 1.0});
  CHECK(curvature_at(s.metric, std::vector<double>{0.0, 1.0, 0.0}).scalar == Approx(-1.5));
}

TEST_CASE("curvature structure invariants") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 5; ++k) {
    const MetricSpec m = gen::random_metric(rng);
    const auto p = gen::random_point(rng);
    const CurvatureAt c = curvature_at(m, p);
    const int n = 3;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int d = 0; d < n; ++d) CHECK(c.christoffel(a, b, d) == c.christoffel(a, d, b));
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) CHECK(c.riemann_at(r, s, a, b) == -c.riemann_at(r, s, b, a));
    double tr = 0.0;
    for (int a = 0; a < n; ++a) tr += c.einstein_at(a, a);
    CHECK(std::fabs(tr - (1.0 - n / 2.0) * c.scalar) < 1e-12 * (1 + std::fabs(c.scalar)));
  }
  // Einstein tensor vanishes identically in two dimensions
  for (CaseTag t : {CaseTag::A, CaseTag::Cplus, CaseTag::KinkPlus}) {
    const Solution2D s = solution_2d({t, 1.0});
    const Curvature cv = curvature(s.rd.g2.evaluate(std::vector<double>{0.1, 1.3}, 2));
    CHECK(cv.einstein.max_abs_value() < 1e-11 * curvature_scale(cv));
  }
}

TEST_CASE("jet curvature agrees with nested finite differences") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 4; ++k) {
    const MetricSpec m = gen::random_metric(rng, 0.3);
    const auto p = gen::random_point(rng);
    oracle::Metric om(m);
    const auto P = oracle::to_point(p);
    const CurvatureAt c = curvature_at(m, p);
    const auto G = oracle::christoffel(om, P);
    const auto R = oracle::riemann(om, P);
    const auto Ric = oracle::ricci_mixed(om, P, kRicciSign);
    double sG = 0, sR = 0;
    for (auto v : G) sG = std::max(sG, std::fabs(static_cast<double>(v)));
    for (auto v : R) sR = std::max(sR, std::fabs(static_cast<double>(v)));
    for (std::size_t i = 0; i < G.size(); ++i) CHECK(rel_err(c.gamma[i], static_cast<double>(G[i]), sG) < 1e-5);
    for (std::size_t i = 0; i < R.size(); ++i) CHECK(rel_err(c.riemann[i], static_cast<double>(R[i]), sR) < 1e-5);
    for (std::size_t i = 0; i < Ric.size(); ++i)
      CHECK(rel_err(c.ricci_mixed[i], static_cast<double>(Ric[i]), sR) < 1e-5);
    const CottonAt ct = cotton_at(m, p);
    const auto Cf = oracle::cotton(om, P, kRicciSign);
    double sC = 0;
    for (auto v : Cf) sC = std::max(sC, std::fabs(static_cast<double>(v)));
    for (int i = 0; i < 9; ++i) CHECK(rel_err(ct.c[i], static_cast<double>(Cf[i]), sC) < 1e-5);
  }
}

TEST_CASE("Cotton tensor detects a non-conformally-flat perturbation") {
  MetricSpec m = flat3();
  m.set(0, 0, "1 + 0.1*x*y*t");
  const std::vector<double> p{0.7, 0.9, -0.8};
  const CottonAt ct = cotton_at(m, p);
  CHECK(ct.max_abs() > 1e-3);
  oracle::Metric om(m);
  const auto Cf = oracle::cotton(om, oracle::to_point(p), kRicciSign);
  for (int i = 0; i < 9; ++i)
    CHECK(std::fabs(ct.c[i] - static_cast<double>(Cf[i])) <= 1e-5 * ct.max_abs());
}

TEST_CASE("catalog 3D metrics are conformally flat") {
  for (CaseTag t : {CaseTag::A, CaseTag::B, CaseTag::Cplus, CaseTag::Cminus, CaseTag::KinkPlus, CaseTag::KinkMinus}) {
    const SolutionCase sc(t, t == CaseTag::B ? -1.0 : 1.0);
    const Solution3D s = solution_3d(sc);
    for (const auto& q : standard_grid(sc, GridKind::Fields3D, 4).points()) {
      const CottonAt ct = cotton_at(s.metric, q);
      INFO(to_string(t));
      CHECK(ct.max_abs() < 1e-9 * ct.scale);
    }
  }
  const CottonAt c = cotton_at(solution_3d({CaseTag::Cplus, 1.0}).metric, std::vector<double>{0.3, 1.2, -0.7});
  CHECK(c.max_abs() < 1e-9 * c.scale);
}

TEST_CASE("Cotton identities and Einstein form") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 5; ++k) {
    const MetricSpec m = gen::random_metric(rng);
    const CottonIdentities id = cotton_identities_at(m, gen::random_point(rng));
    CHECK(id.trace < 1e-9 * id.scale);
    CHECK(id.asymmetry < 1e-12 * id.scale);
    CHECK(id.divergence < 1e-8 * id.scale);
    CHECK(id.einstein_form < 1e-9 * id.scale);
  }
  const CottonIdentities a = cotton_identities_at(solution_3d({CaseTag::A, 1.0}).metric, std::vector<double>{1.0, 0.5, 0.0});
  CHECK(a.trace < 1e-9 * a.scale);
  CHECK(a.divergence < 1e-9 * a.scale);
}

TEST_CASE("metric compatibility and first Bianchi identity") {
  std::mt19937_64 rng(29);
  for (int k = 0; k < 20; ++k) {
    const MetricSpec m = gen::random_metric(rng, 0.2);
    for (int j = 0; j < 5; ++j) {
      const Curvature cv = curvature(m.evaluate(gen::random_point(rng), 2));
      CHECK(metric_compatibility_residual(cv.conn) < 1e-10 * curvature_scale(cv));
      CHECK(first_bianchi_residual(cv) < 1e-10 * curvature_scale(cv));
    }
  }
}

TEST_CASE("covariant Hessian") {
  MetricSpec flat2({"t", "x"}, {});
  flat2.set(0, 0, "1").set(1, 1, "-1");
  const std::vector<double> p{0.2, 0.4};
  const HessianAt h0 = covariant_hessian_at(flat2, parse_expr("3"), p);
  for (double v : h0.dd) CHECK(v == 0.0);
  CHECK(covariant_hessian_at(flat2, parse_expr("x^2"), p).laplacian == Approx(-2.0));

  const Solution2D k = solution_2d({CaseTag::KinkPlus, 1.0});
  const std::vector<double> q{0.0, 0.8};
  const HessianAt h = covariant_hessian_at(k.rd.g2, k.f, q);
  const double f = eval_real(k.f, q, {"t", "x"}, {{"C", 1.0}});
  CHECK(std::fabs(h.laplacian - f + f * f * f) < 1e-10);
}

TEST_CASE("pullbacks") {
  const MetricSpec m = solution_3d({CaseTag::Cplus, 1.0}).metric;
  const std::vector<double> p{0.1, 1.3, 0.2};
  const auto id = pullback_metric_at({parse_expr("t"), parse_expr("x"), parse_expr("y")}, {"t", "x", "y"}, {}, m, p);
  const auto g = m.evaluate(p, 0).values();
  for (int i = 0; i < 9; ++i) CHECK(std::fabs(id[i] - g[i]) < 1e-14);

  MetricSpec conf({"T", "X", "Y"}, {{"C", 2.0}});
  conf.set(0, 0, "1").set(1, 1, "-1").set(2, 2, "-1");
  const TransformSpec tr = transform({CaseTag::A, 2.0});
  const auto pb = pullback_metric_at(tr.map, tr.source, tr.env, conf, std::vector<double>{1.0, 0.0, 0.0});
  const std::vector<double> T{1.0, 0.0, 0.0};
  const double omega = eval_real(tr.omega, T, tr.target, tr.env);
  CHECK(omega == Approx(1.0));  // 2/C at T = 1, Y = 0
  CHECK(pb[0] == Approx(1.0));

  CHECK_THROWS_AS(pullback_metric_at({parse_expr("t"), parse_expr("t"), parse_expr("y")}, {"t", "x", "y"}, {}, m, p),
                  DegenerateMetric);
}

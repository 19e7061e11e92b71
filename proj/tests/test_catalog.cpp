#include "catch_amalgamated.hpp"

#include <cmath>

#include "cottonkit/catalog.hpp"
#include "cottonkit/geometry.hpp"

using namespace cottonkit;
using Catch::Approx;

namespace {

const CaseTag kAll[] = {CaseTag::A, CaseTag::B, CaseTag::Cplus, CaseTag::Cminus, CaseTag::KinkPlus, CaseTag::KinkMinus};

SolutionCase make(CaseTag t, double C) { return {t, t == CaseTag::B ? -std::fabs(C) : C}; }

}  // namespace

TEST_CASE("case construction enforces the sign of C") {
  CHECK_THROWS_AS(SolutionCase(CaseTag::A, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(SolutionCase(CaseTag::B, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SolutionCase(CaseTag::KinkPlus, 0.0), std::invalid_argument);
  CHECK(parse_case_tag("c-") == CaseTag::Cminus);
  CHECK_THROWS_AS(parse_case_tag("d"), std::invalid_argument);
}

TEST_CASE("expected formulas") {
  const Solution2D a = solution_2d({CaseTag::A, 2.0});
  CHECK(eval_real(a.r, std::vector<double>{1.0, 0.3}, {"t", "x"}, {{"C", 2.0}}) == 2.0);
  const Solution2D c = solution_2d({CaseTag::Cplus, 1.0});
  CHECK(eval_real(c.f, std::vector<double>{0.0, 0.7}, {"t", "x"}, {{"C", 1.0}}) == 1.0);
  CHECK(eval_real(c.r, std::vector<double>{0.0, 0.7}, {"t", "x"}, {{"C", 1.0}}) == -2.0);
  const Solution2D k = solution_2d({CaseTag::KinkPlus, 1.0});
  CHECK(eval_real(k.f, std::vector<double>{0.0, 2.0}, {"t", "x"}, {{"C", 1.0}}) == Approx(0.761594155956));
  CHECK(eval_real(solution_3d({CaseTag::Cplus, 4.0}).R, std::vector<double>{0, 1, 0}, {"t", "x", "y"}, {{"C", 4.0}}) ==
        -6.0);
  CHECK(eval_real(solution_3d({CaseTag::KinkPlus, 1.0}).R, std::vector<double>{0, 40, 0}, {"t", "x", "y"},
                  {{"C", 1.0}}) == Approx(-1.5));
}

TEST_CASE("computed curvatures match the catalog formulas") {
  for (CaseTag t : kAll)
    for (double C : {0.25, 1.0, 9.0}) {
      const SolutionCase sc = make(t, C);
      const Solution2D s2 = solution_2d(sc);
      const Solution3D s3 = solution_3d(sc);
      for (const auto& p : standard_grid(sc, GridKind::Fields2D).points()) {
        const Curvature cv = curvature(s2.rd.g2.evaluate(p, 2));
        const double r = eval_real(s2.r, p, {"t", "x"}, sc.env());
        CHECK(std::fabs(cv.scalar.value() - r) < 1e-9 * curvature_scale(cv));
      }
      for (const auto& p : standard_grid(sc, GridKind::Fields3D, 4).points()) {
        const Curvature cv = curvature(s3.metric.evaluate(p, 2));
        const double R = eval_real(s3.R, p, {"t", "x", "y"}, sc.env());
        CHECK(std::fabs(cv.scalar.value() - R) < 1e-9 * curvature_scale(cv));
      }
    }
}

TEST_CASE("transforms pull the conformally flat metric back to the catalog metric") {
  for (CaseTag t : kAll)
    for (double C : {0.25, 1.0, 9.0}) {
      const SolutionCase sc = make(t, C);
      const TransformSpec tr = transform(sc);
      const MetricSpec target = conformal_flat_metric(tr);
      const MetricSpec m = solution_3d(sc).metric;
      for (const auto& p : standard_grid(sc, GridKind::Transform).points()) {
        REQUIRE(tr.in_domain(p));
        const auto pb = pullback_metric_at(tr.map, tr.source, tr.env, target, p);
        const auto g = m.evaluate(p, 0).values();
        double scale = 1.0;
        for (double v : g) scale = std::max(scale, std::fabs(v));
        for (int i = 0; i < 9; ++i) {
          INFO(to_string(t) << " C=" << C << " p=" << p[0] << "," << p[1] << "," << p[2] << " i=" << i);
          CHECK(std::fabs(pb[i] - g[i]) < 1e-9 * scale);
        }
      }
    }
}

TEST_CASE("transform special values") {
  const TransformSpec a = transform({CaseTag::A, 1.0});
  const std::vector<double> p{1.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i) CHECK(eval_real(a.map[i], p, a.source, a.env) == (i == 0 ? 1.0 : 0.0));
  CHECK(eval_real(a.omega, p, a.target, a.env) == 2.0);

  const TransformSpec b = transform({CaseTag::B, -1.0});
  const std::vector<double> q{0.3, 1.7, 0.0};
  CHECK(eval_real(b.map[0], q, b.source, b.env) == 0.3);
  CHECK(eval_real(b.map[1], q, b.source, b.env) == 1.7);
  CHECK(eval_real(b.map[2], q, b.source, b.env) == 0.0);

  // the kink factor approaches the case-(c) factor far out in X
  const TransformSpec k = transform({CaseTag::KinkPlus, 1.0});
  const TransformSpec c = transform({CaseTag::Cplus, 1.0});
  const std::vector<double> far{0.2, 50.0, 0.1};
  const double wk = eval_real(k.omega, far, k.target, k.env);
  const double wc = eval_real(c.omega, far, c.target, c.env);
  CHECK(std::fabs(wk / wc - 1.0) < 0.01);
}

TEST_CASE("standard grids avoid singular loci") {
  for (CaseTag t : kAll) {
    const Grid g = standard_grid(make(t, 1.0), GridKind::Fields3D);
    CHECK(g.size() == 343);
    for (const auto& p : g.points()) {
      if (t == CaseTag::A) CHECK(p[0] > 0);
      if (t == CaseTag::B || t == CaseTag::Cplus || t == CaseTag::Cminus) CHECK(p[1] > 0);
    }
  }
}

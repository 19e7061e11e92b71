#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>

#include "cottonkit/catalog.hpp"
#include "cottonkit/reduction.hpp"

using namespace cottonkit;
using Catch::Approx;

namespace {

const CaseTag kAll[] = {CaseTag::A, CaseTag::B, CaseTag::Cplus, CaseTag::Cminus, CaseTag::KinkPlus, CaseTag::KinkMinus};

SolutionCase make(CaseTag t, double C) { return {t, t == CaseTag::B ? -std::fabs(C) : C}; }

}  // namespace

TEST_CASE("assembly of the 3D metric") {
  ReducedData flat{MetricSpec({"t", "x"}, {})};
  flat.g2.set(0, 0, "1").set(1, 1, "-1");
  const MetricSpec m = assemble_3d_metric(flat);
  const auto g = m.evaluate(std::vector<double>{0.1, 0.2, 0.3}, 0).values();
  const std::vector<double> eta{1, 0, 0, 0, -1, 0, 0, 0, -1};
  for (int i = 0; i < 9; ++i) CHECK(g[i] == eta[i]);

  // every catalog reduction reproduces the catalog line element
  for (CaseTag t : kAll) {
    const SolutionCase sc = make(t, 1.0);
    const MetricSpec a = assemble_3d_metric(solution_2d(sc).rd);
    const MetricSpec b = solution_3d(sc).metric;
    for (const auto& p : standard_grid(sc, GridKind::Fields3D, 4).points()) {
      const auto ga = a.evaluate(p, 0).values(), gb = b.evaluate(p, 0).values();
      for (int i = 0; i < 9; ++i) CHECK(std::fabs(ga[i] - gb[i]) < 1e-12 * (1 + std::fabs(gb[i])));
    }
  }
}

TEST_CASE("dual field strength") {
  CHECK(field_strength_f(solution_2d({CaseTag::A, 1.0}).rd, std::vector<double>{1.0, 0.0}) == 0.0);
  CHECK(field_strength_f(solution_2d({CaseTag::Cplus, 1.0}).rd, std::vector<double>{0.0, 2.0}) == Approx(1.0));
  CHECK(field_strength_f(solution_2d({CaseTag::Cminus, 1.0}).rd, std::vector<double>{0.0, 2.0}) == Approx(-1.0));
  CHECK(field_strength_f(solution_2d({CaseTag::KinkPlus, 1.0}).rd, std::vector<double>{0.0, 1.0}) ==
        Approx(0.462117157260).epsilon(1e-11));
  for (CaseTag t : kAll)
    for (double C : {0.25, 1.0, 9.0}) {
      const SolutionCase sc = make(t, C);
      const Solution2D s = solution_2d(sc);
      for (const auto& p : standard_grid(sc, GridKind::Fields2D).points()) {
        const double f = field_strength_f(s.rd, p);
        CHECK(std::fabs(f - eval_real(s.f, p, {"t", "x"}, s.rd.g2.env())) < 1e-10 * (1 + std::fabs(C)));
      }
    }
}

TEST_CASE("reduced action density") {
  const std::vector<double> p{0.3, 1.7};
  CHECK(reduced_action_density(solution_2d({CaseTag::A, 1.0}).rd, p).density == 0.0);
  CHECK(reduced_action_density(solution_2d({CaseTag::A, 1.0}).rd, p).theta == Approx(1.0));
  for (CaseTag t : {CaseTag::Cplus, CaseTag::Cminus}) {
    const Solution2D s = solution_2d({t, 1.0});
    const ActionDensity d = reduced_action_density(s.rd, p);
    const double sign = t == CaseTag::Cplus ? 1.0 : -1.0;
    const double sqrtg = 1.0 / (p[1] * p[1]);
    CHECK(d.density == Approx(sign * sqrtg / (8 * std::numbers::pi * std::numbers::pi)));
  }
}

TEST_CASE("field equations hold on the catalog") {
  for (CaseTag t : kAll)
    for (double C : {0.25, 1.0, 9.0}) {
      const SolutionCase sc = make(t, C);
      const Solution2D s = solution_2d(sc);
      for (const auto& p : standard_grid(sc, GridKind::Fields2D).points()) {
        const FieldEqResiduals r = eom_residuals(s.rd, p);
        INFO(to_string(t) << " C=" << C << " x=" << p[1]);
        CHECK(r.eq11 < 1e-9 * r.scale);
        CHECK(r.eq12_max() < 1e-9 * r.scale);
        CHECK(std::fabs(r.eq14) < 1e-9 * r.scale);
        CHECK(r.eq15_max() < 1e-9 * r.scale);
        CHECK(std::fabs(r.eq15_trace) < 1e-12 * r.scale);
        CHECK(std::fabs(r.first_integral_value - sc.C) < 1e-9 * r.scale);
        CHECK(std::fabs(r.eq12_trace - r.eq14) < 1e-10 * r.scale);
      }
    }
}

TEST_CASE("sign flip of f and a leaves the equations invariant") {
  const Solution2D p = solution_2d({CaseTag::KinkPlus, 1.0});
  ReducedData q = p.rd;
  q.a[0] = parse_expr("1/cosh(x)");  // not a solution
  ReducedData qm = q;
  qm.a[0] = -q.a[0];
  for (double x : {-1.0, 0.3, 2.0}) {
    const std::vector<double> pt{0.0, x};
    const FieldEqResiduals a = eom_residuals(q, pt), b = eom_residuals(qm, pt);
    CHECK(a.eq11 == Approx(b.eq11).epsilon(1e-12));
    CHECK(a.eq12_max() == Approx(b.eq12_max()).epsilon(1e-12));
    CHECK(a.eq12_max() > 1e-3);
  }
}

TEST_CASE("Kaluza-Klein curvature relation") {
  for (CaseTag t : kAll)
    for (double C : {0.25, 1.0, 9.0}) {
      const SolutionCase sc = make(t, C);
      const Solution2D s = solution_2d(sc);
      const Solution3D s3 = solution_3d(sc);
      for (const auto& p : standard_grid(sc, GridKind::Fields2D).points()) {
        const KkRelation k = kk_relation_at(s.rd, p);
        CHECK(std::fabs(k.residual) < 1e-9 * k.scale);
        std::vector<double> p3 = p;
        p3.push_back(0.0);
        CHECK(std::fabs(k.R3 - eval_real(s3.R, p3, {"t", "x", "y"}, sc.env())) < 1e-9 * k.scale);
      }
    }
  CHECK(kk_relation_at(solution_2d({CaseTag::KinkPlus, 1.0}).rd, std::vector<double>{0.0, 0.0}).R3 == Approx(1.0));
  CHECK(kk_relation_at(solution_2d({CaseTag::Cplus, 1.0}).rd, std::vector<double>{0.0, 1.0}).R3 == Approx(-1.5));
}

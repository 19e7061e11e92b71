#include "catch_amalgamated.hpp"

#include <cmath>

#include "cottonkit/lattice.hpp"

using namespace cottonkit;
using Catch::Approx;

TEST_CASE("reduced action variation converges to the field equations") {
  LatticeOptions o;
  const auto levels = lattice_levels_2d(lattice_test_fields_2d(), o);
  REQUIRE(levels.size() == 4);
  for (std::size_t i = 1; i < levels.size(); ++i) {
    const double ratio = levels[i - 1].discrepancy / levels[i].discrepancy;
    CHECK(ratio == Approx(4.0).epsilon(0.2));
  }
  const CheckReport rep = lattice_variation_check_2d(lattice_test_fields_2d(), o);
  CHECK(rep.pass);
  CHECK(rep.details.at("order") == Approx(2.0).margin(0.3));
}

TEST_CASE("windowed kink on a periodic lattice") {
  LatticeOptions o;
  o.levels = {32, 64, 128};
  const CheckReport rep = lattice_variation_check_2d(windowed_kink_fields(1.0), o);
  CHECK(rep.pass);
  CHECK(rep.message.empty());
}

TEST_CASE("Chern-Simons variation and the Cotton tensor") {
  LatticeOptions o;
  o.levels = {16, 32, 64};
  MetricSpec flat({"t", "x", "y"}, {});
  flat.set(0, 0, "1").set(1, 1, "-1").set(2, 2, "-1");
  const CheckReport f = lattice_cotton_variation_check_3d(flat, o);
  CHECK(f.pass);
  CHECK(f.max_residual == 0.0);

  // With the calibrated curvature sign the variation carries +1/(4 pi^2).
  o.cotton_sign = +1.0;
  const auto plus = lattice_levels_3d(lattice_test_metric_3d(), o);
  CHECK(fitted_order({plus[0].h, plus[1].h, plus[2].h}, {plus[0].discrepancy, plus[1].discrepancy, plus[2].discrepancy}) ==
        Approx(2.0).margin(0.3));
  o.cotton_sign = -1.0;
  const auto minus = lattice_levels_3d(lattice_test_metric_3d(), o);
  CHECK(minus.back().discrepancy == Approx(2.0).margin(0.05));
}

TEST_CASE("both sides scale linearly with a small perturbation") {
  LatticeOptions o;
  o.levels = {32};
  o.cotton_sign = +1.0;
  const auto a = lattice_levels_3d(lattice_test_metric_3d(0.01), o);
  const auto b = lattice_levels_3d(lattice_test_metric_3d(0.005), o);
  CHECK(a[0].scale / b[0].scale == Approx(2.0).epsilon(0.02));
  CHECK(a[0].discrepancy == Approx(b[0].discrepancy).epsilon(0.05));
}

TEST_CASE("lattice levels must be compatible with the sample sites") {
  LatticeOptions o;
  o.levels = {12};
  CHECK_THROWS_AS(lattice_levels_2d(lattice_test_fields_2d(), o), std::invalid_argument);
}

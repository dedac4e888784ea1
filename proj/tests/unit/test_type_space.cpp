#include <doctest.h>

#include "helpers.hpp"
#include "kernelpf/measure.hpp"
#include "kernelpf/type_space.hpp"

using namespace kernelpf;

TEST_CASE("finite spaces require non-empty distinct labels") {
  CHECK_THROWS_AS(TypeSpace::finite({}), PreconditionError);
  CHECK_THROWS_AS(TypeSpace::finite({"a", "a"}), PreconditionError);
  auto space = TypeSpace::finite({"a", "b"});
  CHECK(space->site_count() == 2);
  CHECK(space->site_of_label("b") == 1);
}

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(TypeSpace::grid(1.0, {0.0, 0.5, 0.4}, {0.1, 0.1, 0.1}, {}),
                  PreconditionError);
  CHECK_THROWS_AS(TypeSpace::grid(1.0, {0.0, 2.0}, {0.1, 0.1}, {}), PreconditionError);
  CHECK_THROWS_AS(TypeSpace::grid(1.0, {0.0, 0.5}, {0.1, -0.1}, {}), PreconditionError);
  CHECK_THROWS_AS(TypeSpace::grid(1.0, {0.0, 0.5}, {0.1, 0.1}, {2.0}), PreconditionError);
}

TEST_CASE("uniform grid carries composite trapezoid weights") {
  auto space = TypeSpace::uniform_grid(2.0, 5, {0.0});
  double total = 0.0;
  for (double w : space->weights()) total += w;
  CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(space->site_count() == 6);
  CHECK(space->coordinate(5) == 0.0);          // the point mass
  CHECK(space->is_point_mass_site(5));
  CHECK(space->site_at(0.0).value() == 5);     // point masses win the lookup
  CHECK(space->site_at(0.5).value() == 1);
}

TEST_CASE("interval weights integrate a linear density exactly") {
  auto space = TypeSpace::uniform_grid(1.0, 11, {});
  // density d(y) = 2y, integral over [0,t] = t^2; t off the node set
  const double t = 0.47;
  const auto w = space->interval_weights(t);
  double acc = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * 2.0 * space->nodes()[j];
  CHECK(acc == doctest::Approx(t * t).epsilon(1e-12));
}

TEST_CASE("indicator profile is the trapezoid view of [0,t]") {
  auto space = TypeSpace::uniform_grid(1.0, 5, {0.0});
  const auto profile = space->indicator_profile(SetDescriptor::interval(0.5));
  CHECK(profile[0] == doctest::Approx(1.0));
  CHECK(profile[1] == doctest::Approx(1.0));
  CHECK(profile[2] == doctest::Approx(0.5));  // boundary node carries half weight
  CHECK(profile[3] == 0.0);
  CHECK(profile[5] == 1.0);                   // the origin atom is inside
}

TEST_CASE("measures: masses, densities and set values") {
  auto space = TypeSpace::uniform_grid(1.0, 5, {0.0});
  std::vector<double> density(5, 1.0);  // Lebesgue on [0,1]
  auto mu = Measure::from_density(space, density, {0.25});
  CHECK(mu.total_mass() == doctest::Approx(1.25));
  CHECK(mu.measure_of(SetDescriptor::all()) == doctest::Approx(1.25));
  CHECK(mu.measure_of(SetDescriptor::interval(0.5)) == doctest::Approx(0.75));
  CHECK(mu.node_density(2) == doctest::Approx(1.0));
  CHECK(mu.atom_mass(0) == doctest::Approx(0.25));

  auto delta = Measure::point_mass(space, 5);
  CHECK(delta.total_mass() == 1.0);
  CHECK(delta.measure_of(SetDescriptor::interval(0.0)) == 1.0);
}

TEST_CASE("exponential sums evaluate and integrate in closed form") {
  ExpSum f;
  f.add(2.0, 3.0);
  f.add(1.0, 0.0);
  CHECK(f.eval(0.0) == doctest::Approx(3.0));
  CHECK(f.integral(1.0) == doctest::Approx(2.0 / 3.0 * (1.0 - std::exp(-3.0)) + 1.0));
  ExpSum g;
  g.add(1.0, 2.0);
  CHECK(g.integral_all() == doctest::Approx(0.5));
  g.add(1.0, -1.0);
  CHECK(std::isinf(g.integral_all()));
}

TEST_CASE("functions evaluate at sites and closed-form points") {
  auto space = TypeSpace::uniform_grid(1.0, 5, {0.0});
  ExpSum form;
  form.add(1.0, 1.0);
  auto fn = TypeFunction::from_exp_sum(space, form);
  CHECK(fn.value_at(Point::at(0.25)) == doctest::Approx(std::exp(-0.25)));
  CHECK(fn.value_at(Point::at(0.1234)) == doctest::Approx(std::exp(-0.1234)));

  auto plain = TypeFunction(space, std::vector<double>(6, 1.0));
  CHECK_THROWS_AS(plain.value_at(Point::at(0.1234)), PreconditionError);
  CHECK(plain.min_over(SetDescriptor::all()) == 1.0);
}

TEST_CASE("set descriptors render and test membership") {
  auto space = TypeSpace::finite({"a", "b"});
  auto set = SetDescriptor::of_sites({1});
  CHECK(set.contains_site(*space, 1));
  CHECK_FALSE(set.contains_site(*space, 0));
  CHECK(set.to_string(*space) == "b");
  CHECK(SetDescriptor::all().to_string(*space) == "all");
}

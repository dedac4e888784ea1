#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "kernelpf/atom_kernel.hpp"

using namespace kernelpf;
using namespace kernelpf::testing;

TEST_CASE("apply_kernel: scalar and permutation cases") {
  // M = [2] split as m = [1], g = (1), gamma = (1)
  auto k = dense_full({{2.0}}, {1.0}, {1.0});
  auto h = TypeFunction(k->space_ptr(), {3.0});
  CHECK(k->apply_M(h)[0] == doctest::Approx(6.0).epsilon(1e-14));

  auto perm = dense_full({{0.0, 1.0}, {1.0, 0.0}}, {2.0, 0.0}, {0.0, 0.5});
  auto h2 = TypeFunction(perm->space_ptr(), {1.0, 2.0});
  auto out = perm->apply_M(h2);
  CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("apply_kernel on the closed-form kernel: Mg in closed form") {
  const double a = 2.0, b = 2.0, c = 0.2;
  auto kernel = AnalyticKernel::create(a, b, c, 401, 20.0);
  // integral of g against M(x,.): (c a/(1+b)) e^{-bx} + c^2 e^{-bx}
  const double coef = c * a / (1.0 + b) + c * c;
  auto out = kernel->apply_M(kernel->g());
  REQUIRE(out.exp_form().has_value());
  for (double x : {0.0, 0.5, 2.0, 7.5}) {
    CHECK(rel_err(out.value_at(Point::at(x)), coef * std::exp(-b * x)) < 1e-13);
  }
  // and the quadrature twin agrees at its own accuracy
  auto twin = kernel->quadrature_twin();
  auto out_quad = twin->apply_M(kernel->g());
  CHECK(rel_err(out_quad[0], coef) < 2e-3);
}

TEST_CASE("apply_adjoint: permutation, scalar, and the closed-form kernel") {
  auto perm = dense_full({{0.0, 1.0}, {1.0, 0.0}}, {2.0, 0.0}, {0.0, 0.5});
  auto mu = Measure::from_masses(perm->space_ptr(), {1.0, 0.0});
  auto out = perm->adjoint_M(mu);
  CHECK(out.masses()[0] == doctest::Approx(0.0));
  CHECK(out.masses()[1] == doctest::Approx(1.0));

  auto scalar = dense_full({{2.0}}, {1.0}, {1.0});
  auto mu1 = Measure::from_masses(scalar->space_ptr(), {3.0});
  CHECK(scalar->adjoint_M(mu1).masses()[0] == doctest::Approx(6.0));

  // gamma M = a e^{-y} dy + c delta_0
  const double a = 2.0, b = 2.0, c = 0.2;
  auto kernel = AnalyticKernel::create(a, b, c, 401, 20.0);
  auto pushed = kernel->adjoint_M(kernel->gamma());
  CHECK(pushed.atom_mass(0) == doctest::Approx(c).epsilon(1e-14));
  for (std::size_t j : {std::size_t{0}, std::size_t{13}, std::size_t{200}}) {
    const double y = kernel->space().nodes()[j];
    CHECK(rel_err(pushed.node_density(j), a * std::exp(-y)) < 1e-12);
  }
  // quadrature cross-check of the interval mass
  auto twin = kernel->quadrature_twin();
  auto pushed_quad = twin->adjoint_M(kernel->gamma());
  const auto set = SetDescriptor::interval(1.0);
  CHECK(rel_err(pushed_quad.measure_of(set), pushed.measure_of(set)) < 2e-3);
}

TEST_CASE("operations reject functions and measures from foreign spaces") {
  auto k1 = dense_full({{2.0}}, {1.0}, {1.0});
  auto k2 = dense_full({{0.5, 0.5}, {0.25, 0.75}}, {0.2, 0.4}, {0.5, 0.5});
  auto h2 = TypeFunction(k2->space_ptr(), {1.0, 1.0});
  CHECK_THROWS_AS(k1->apply_M(h2), PreconditionError);
  auto mu2 = Measure::from_masses(k2->space_ptr(), {1.0, 0.0});
  CHECK_THROWS_AS(k1->adjoint_M(mu2), PreconditionError);
}

TEST_CASE("iterate_kernel: the zero-step kernel is the point mass") {
  auto k = dense_full({{0.5, 0.5}, {0.25, 0.75}}, {0.2, 0.4}, {0.5, 0.5});
  CHECK(k->iterate(KernelPart::Full, 0, Point::at_site(0), SetDescriptor::of_sites({0})) == 1.0);
  CHECK(k->iterate(KernelPart::Full, 0, Point::at_site(0), SetDescriptor::of_sites({1})) == 0.0);
}

TEST_CASE("rank-one fixture: iterate exponents against the brute-force oracle") {
  const double a1 = 0.8, a = 0.5;
  auto kernel = rank_one_fixture(a1, a);
  const Matrix m = kernel->stem_operator();
  const Matrix M = kernel->full_matrix();
  const double g1_gamma1_00 = 1.0 * (a1 / 2.0);  // g1(0) gamma1({0}) != a1

  for (unsigned n : {1u, 2u, 3u, 5u, 8u}) {
    const Matrix mn = m.power(n);
    const Matrix Mn = M.power(n);
    // m^n = a1^{n-1} g1 (x) gamma1 (one power less than a1^n g1 (x) gamma1)
    CHECK(rel_err(mn(0, 0), std::pow(a1, n - 1.0) * g1_gamma1_00) < 1e-12);
    CHECK(std::abs(mn(0, 0) - std::pow(a1, double(n)) * g1_gamma1_00) > 1e-3);
    CHECK(rel_err(kernel->iterate(KernelPart::StemOnly, n, Point::at_site(0),
                                  SetDescriptor::of_sites({0})),
                  mn(0, 0)) < 1e-12);
    // M^n = m^n + a^{n-1} g (x) gamma
    CHECK(rel_err(Mn(2, 2), std::pow(a, n - 1.0) * 1.0 * a) < 1e-12);
    CHECK(rel_err(kernel->iterate(KernelPart::Full, n, Point::at_site(2),
                                  SetDescriptor::of_sites({2})),
                  Mn(2, 2)) < 1e-12);
  }
}

TEST_CASE("closed-form stem iterates match the Poisson tail oracle") {
  auto kernel = AnalyticKernel::create(2.0, 2.0, 0.2, 401, 20.0);
  // a^n P(N_1 >= n): reference values from an independent evaluation of the
  // regularized incomplete gamma function
  const double want1 = 1.264241117657115e+00;
  const double want3 = 6.424111765711534e-01;
  const double want10 = 1.140996898188500e-04;
  const auto at = [&](std::size_t n) {
    return kernel->iterate(KernelPart::StemOnly, n, Point::at(0.0),
                           SetDescriptor::interval(1.0));
  };
  CHECK(rel_err(at(1), want1) < 1e-12);
  CHECK(rel_err(at(3), want3) < 1e-12);
  CHECK(rel_err(at(10), want10) < 1e-11);

  // and the generic quadrature route reproduces them at its own accuracy
  auto twin = kernel->quadrature_twin();
  CHECK(rel_err(twin->iterate(KernelPart::StemOnly, 3, Point::at(0.0),
                              SetDescriptor::interval(1.0)),
                want3) < 1e-2);
}

TEST_CASE("log Poisson tail across the bulk, the edge, and the far tail") {
  // reference values from an independent evaluation of the survival function
  const struct {
    double lambda;
    std::size_t n;
    double want;
  } cases[] = {
      {1.0, 1, -4.586751453870819e-01},  {1.0, 3, -2.521968260031400e+00},
      {1.0, 10, -1.600990982520202e+01}, {5.0, 2, -4.126759586340625e-02},
      {25.0, 40, -5.671246924001392e+00}, {100.0, 80, -1.760539195331285e-02},
      {3000.0, 200, 0.0},                {3000.0, 3100, -3.347603881972915e+00},
  };
  for (const auto& c : cases) {
    const double got = log_poisson_tail(c.lambda, c.n);
    if (c.want == 0.0)
      CHECK(std::abs(got) < 1e-12);
    else
      CHECK(rel_err(got, c.want) < 1e-10);
  }
  CHECK(log_poisson_tail(0.0, 3) == -std::numeric_limits<double>::infinity());
  CHECK(log_poisson_tail(2.5, 0) == 0.0);
}

TEST_CASE("validate_atom accepts the explicit construction and rejects bad atoms") {
  auto ok = dense_full({{0.5, 0.5}, {0.5, 0.5}}, {1.0, 1.0}, {0.25, 0.25});
  const auto report = validate_atom(*ok);
  CHECK(report.valid);
  CHECK(report.max_residual <= 1e-10);
  // this g makes M - g (x) gamma dip to -0.1
  CHECK_THROWS_AS(dense_full({{0.5, 0.5}, {0.5, 0.5}}, {1.2, 1.2}, {0.25, 0.5}),
                  PreconditionError);

  auto analytic = AnalyticKernel::create(2.0, 2.0, 0.2, 101, 20.0);
  CHECK(validate_atom(*analytic).max_residual == 0.0);
}

TEST_CASE("validate_atom clamps negativity within tolerance and warns") {
  auto nearly = DenseKernel::from_full(states(1), Matrix::from_rows({{1.0}}), {1.0},
                                       {1.0 + 5e-11});
  const auto report = validate_atom(*nearly);
  CHECK(report.valid);
  CHECK(report.clamped_negative > 0.0);
  CHECK(!report.warnings.empty());
}

TEST_CASE("semigroup property holds exactly on dense kernels") {
  Rng rng(41);
  auto fixture = random_atom_kernel(rng, 4);
  const Matrix& M = fixture.M;
  for (auto [n, k] : {std::pair<unsigned, unsigned>{1, 1}, {2, 3}, {4, 2}}) {
    const Matrix lhs = M.power(n + k);
    const Matrix rhs = M.power(n).multiply(M.power(k));
    for (std::size_t i = 0; i < M.rows(); ++i)
      for (std::size_t j = 0; j < M.cols(); ++j)
        CHECK(lhs(i, j) == doctest::Approx(rhs(i, j)).epsilon(1e-12));
  }
}

TEST_CASE("atom decomposition M = m + g (x) gamma holds on every variant") {
  // dense: exact matrix identity
  Rng rng(7);
  auto fixture = random_atom_kernel(rng, 5);
  const auto& kernel = *fixture.kernel;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(fixture.M(i, j) == doctest::Approx(kernel.stem_operator()(i, j) +
                                               kernel.g()[i] * kernel.gamma().masses()[j])
                                   .epsilon(1e-14));

  // quadrature twin: exact by construction in the discrete system
  auto analytic = AnalyticKernel::create(2.0, 2.0, 0.2, 101, 20.0);
  auto twin = analytic->quadrature_twin();
  const auto set = SetDescriptor::interval(0.7);
  const auto full = twin->set_function(KernelPart::Full, set);
  const auto stem = twin->set_function(KernelPart::StemOnly, set);
  const double gamma_A = twin->gamma().measure_of(set);
  for (std::size_t i = 0; i < twin->space().site_count(); ++i)
    CHECK(full[i] == doctest::Approx(stem[i] + twin->g()[i] * gamma_A).epsilon(1e-14));

  // closed form: the same identity from the exact evaluators at a node
  const double x = analytic->space().nodes()[2];
  const double m_val = 2.0 * -std::expm1(x - 0.7);
  const double g_val = 0.2 * std::exp(-2.0 * x);
  CHECK(rel_err(analytic->set_function(KernelPart::Full, set).value_at(Point::at(x)),
                m_val + g_val * 1.0) < 1e-13);
}

TEST_CASE("quadrature resolvent converges to the closed form at order >= 1") {
  const double s = 0.4, t = 1.0;
  const double closed = analytic_reference(2.0, 2.0, 0.2, s, 0.0, t).m_s_interval;
  CHECK(closed == doctest::Approx(0.690030795075229).epsilon(1e-12));

  std::vector<double> errors;
  for (std::size_t n : {51u, 101u, 201u, 401u}) {
    auto twin = AnalyticKernel::create(2.0, 2.0, 0.2, n, 20.0)->quadrature_twin();
    const double got =
        twin->resolvent_m(s, Point::at(0.0), SetDescriptor::interval(t), 400);
    errors.push_back(std::abs(got - closed));
  }
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    const double order = std::log2(errors[k] / errors[k + 1]);
    CHECK(order >= 1.0);
  }
}

TEST_CASE("closed-form resolvent is continuous through as = 1") {
  auto kernel = AnalyticKernel::create(2.0, 2.0, 0.2, 101, 20.0);
  const double s0 = 0.5;  // as = 1 exactly
  const double at = kernel->m_resolvent_interval(s0, 0.0, 1.0);
  const double lo = kernel->m_resolvent_interval(s0 - 1e-8, 0.0, 1.0);
  const double hi = kernel->m_resolvent_interval(s0 + 1e-8, 0.0, 1.0);
  CHECK(std::abs(at - lo) < 1e-6);
  CHECK(std::abs(at - hi) < 1e-6);
  // and matches the series route through the Poisson tails
  double series = 0.0;
  for (std::size_t n = 1; n <= 60; ++n)
    series += std::pow(s0, static_cast<double>(n)) *
              std::exp(kernel->log_m_iterate_interval(n - 1, 0.0, 1.0));
  CHECK(rel_err(at, series) < 1e-12);
}

TEST_CASE("analytic_reference reproduces the closed-form spectral data") {
  // criticality boundary: c = (r-1)/r = 1/3 gives R = 1
  const auto boundary = analytic_reference(2.0, 2.0, 1.0 / 3.0, 0.5, 0.0, 1.0);
  CHECK(boundary.r == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(boundary.R == doctest::Approx(1.0).epsilon(1e-14));

  const auto sub = analytic_reference(2.0, 2.0, 0.2, 0.5, 0.0, 1.0);
  CHECK(sub.R == doctest::Approx(1.5 / 1.3).epsilon(1e-14));

  // f(s) ~ c s as s -> 0 (the first coefficient is c)
  const auto small = analytic_reference(2.0, 2.0, 0.2, 1e-8, 0.0, 1.0);
  CHECK(rel_err(small.f_s / 1e-8, 0.2) < 1e-7);

  // h_s and pi_s against their displayed forms
  const double s = 0.4, r = 1.5;
  const auto ref = analytic_reference(2.0, 2.0, 0.2, s, 0.25, 1.0);
  CHECK(rel_err(ref.h_s, (r * 0.2 * s / (r - s)) * std::exp(-2.0 * 0.25)) < 1e-14);
  const double u = 2.0 * s - 1.0;
  CHECK(rel_err(ref.pi_s_interval, s + 2.0 * s * s * std::expm1(u) / u) < 1e-14);

  CHECK_THROWS_AS(analytic_reference(2.0, 2.0, 0.2, 1.6, 0.0, 1.0), PreconditionError);
}

TEST_CASE("grid truncation is reported, never silently ignored") {
  auto tight = AnalyticKernel::create(2.0, 2.0, 0.2, 101, 20.0);
  CHECK(tight->truncation_error() == doctest::Approx(std::exp(-20.0)));
  CHECK(!tight->validate(1e-10).warnings.empty());

  // the default grid obeys e^{-min(1,1+b) T} < 1e-12
  auto defaulted = AnalyticKernel::create(2.0, 2.0, 0.2, 101);
  CHECK(defaulted->truncation_error() < 1e-12);
}

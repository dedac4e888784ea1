// Acceptance suite: one line per criterion, [PASS]/[FAIL], exit code is the
// number of failed criteria. Tolerances are pinned in code next to each
// check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "kernelpf/asymptotics.hpp"
#include "kernelpf/kernel_io.hpp"
#include "kernelpf/simulate.hpp"

using namespace kernelpf;

namespace {

struct Harness {
  int failures = 0;
  int index = 0;

  void run(const std::string& name, double time_budget_s,
           const std::function<bool(std::string&)>& body) {
    ++index;
    std::string detail;
    bool ok = false;
    const auto start = std::chrono::steady_clock::now();
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
      ok = false;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_budget_s > 0.0 && elapsed > time_budget_s) {
      ok = false;
      detail += " [over time budget " + std::to_string(time_budget_s) + "s]";
    }
    std::printf("[%s] criterion %d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", index,
                name.c_str(), elapsed, detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

bool close(double got, double want, double tol) { return std::abs(got - want) <= tol; }

double rel(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// --- 1. closed-form spectral values through the standard pipeline -------------

bool criterion_spectral_values(std::string& detail) {
  auto kernel = AnalyticKernel::create(2.0, 2.0, 0.2, 400, 20.0);
  const SpectralReport report = classify(*kernel, 200);
  const double r_want = 1.5, R_want = 1.5 / 1.3;
  detail = "r=" + fmt(report.r) + " R=" + fmt(report.R);
  return close(report.r, r_want, 1e-6) && close(report.R, R_want, 1e-6);
}

// --- 2. criticality boundary ---------------------------------------------------

bool criterion_criticality(std::string& detail) {
  const auto run = [](double c) { return classify(*AnalyticKernel::create(2.0, 2.0, c, 400, 20.0), 200); };
  const auto lo = run(0.30);
  const auto mid = run(1.0 / 3.0);
  const auto hi = run(0.36);
  detail = to_string(lo.criticality) + "/" + to_string(mid.criticality) + "/" +
           to_string(hi.criticality);
  const bool labels = lo.criticality == Criticality::Subcritical &&
                      mid.criticality == Criticality::Critical &&
                      hi.criticality == Criticality::Supercritical;
  const bool roots = close(lo.f_R, 1.0, 1e-9) && close(mid.f_R, 1.0, 1e-9) &&
                     close(hi.f_R, 1.0, 1e-9);
  return labels && roots;
}

// --- 3. Perron limit, continuous case -------------------------------------------

bool criterion_perron_limit(std::string& detail) {
  // interval case at (2,2,0.2); expected value is the closed-form limit
  // h(0) pi([0,1]) / (R^2 f'(R)), resolved against two independent oracles
  {
    auto kernel = AnalyticKernel::create(2.0, 2.0, 0.2, 400, 20.0);
    const double a = 2.0, c = 0.2, r = 1.5;
    const double R = r / (1.0 + c * r);
    const double expected =
        c * (a * R * R * std::exp((a * R - 1.0) * 1.0) - R) / (a * R - 1.0);
    PerronLimitOptions options;
    options.n_max = 300;
    options.tol = 1e-3;
    const LimitReport report =
        perron_limit(*kernel, Point::at(0.0), SetDescriptor::interval(1.0), options);
    detail = "trace(300)=" + fmt(report.trace.back()) + " want=" + fmt(expected);
    if (!close(report.trace.back(), expected, 1e-3)) return false;
    if (!report.converged) return false;
  }
  // whole-space case needs aR < 1: c = 1.5 gives R = 6/13, aR = 12/13
  {
    const double a = 2.0, c = 1.5, r = 1.5;
    const double R = r / (1.0 + c * r);
    auto kernel = AnalyticKernel::create(a, 2.0, c, 400, 20.0);
    const double expected = c * R / (1.0 - a * R);
    PerronLimitOptions options;
    options.n_max = 300;
    options.tol = 1e-3;
    const LimitReport report =
        perron_limit(*kernel, Point::at(0.0), SetDescriptor::all(), options);
    detail += "; all-space trace(300)=" + fmt(report.trace.back()) +
              " want=" + fmt(expected);
    if (!close(report.trace.back(), expected, 1e-3)) return false;
  }
  return true;
}

// --- 4. finite-kernel oracle equivalence ----------------------------------------

bool criterion_oracle_equivalence(std::string& detail) {
  Rng rng(20260811);
  double worst_R_rho = 0.0, worst_limit = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t size = 2 + rng.next_u64() % 7;  // sizes 2..8
    // random positive kernel with a valid atom and a certified stem gap
    std::shared_ptr<DenseKernel> kernel;
    EigenOracle oracle;
    for (;;) {
      std::vector<std::vector<double>> M(size, std::vector<double>(size));
      for (auto& row : M)
        for (double& v : row) v = rng.uniform();
      std::vector<double> gamma(size);
      double total = 0.0;
      for (double& v : gamma) total += (v = 0.05 + rng.uniform());
      for (double& v : gamma) v /= total;
      const double theta = 0.5 + 0.4 * rng.uniform();
      std::vector<double> g(size);
      bool degenerate = false;
      for (std::size_t i = 0; i < size; ++i) {
        double cap = 1e300;
        for (std::size_t j = 0; j < size; ++j) cap = std::min(cap, M[i][j] / gamma[j]);
        g[i] = theta * cap;
        if (!(g[i] > 0.0)) degenerate = true;
      }
      if (degenerate) continue;
      auto candidate = DenseKernel::from_full(TypeSpace::finite([&] {
        std::vector<std::string> l(size);
        for (std::size_t i = 0; i < size; ++i) l[i] = std::to_string(i);
        return l;
      }()), Matrix::from_rows(M), g, gamma);
      if (!check_irreducible(*candidate) || detect_period(*candidate).d != 1) continue;
      // stem gap: rho_m below 0.8 rho_M keeps the series resolved at N=400
      const auto orc = power_iteration_oracle(*candidate);
      double rho_m = 0.0;
      {
        std::vector<double> v(size, 1.0);
        for (int it = 0; it < 4000; ++it) {
          auto w = candidate->stem_operator().apply(v);
          double norm = 0.0;
          for (double x : w) norm += std::abs(x);
          if (norm == 0.0) break;
          rho_m = norm;
          for (std::size_t i = 0; i < size; ++i) v[i] = w[i] / norm;
        }
      }
      if (rho_m > 0.8 * orc.rho) continue;
      kernel = candidate;
      oracle = orc;
      break;
    }

    const SpectralReport spectral = classify(*kernel, 400);
    worst_R_rho = std::max(worst_R_rho, std::abs(spectral.R * oracle.rho - 1.0));

    const std::size_t x = rng.next_u64() % size;
    const std::size_t y = rng.next_u64() % size;
    const auto A = SetDescriptor::of_sites({y});
    const auto pair = invariant_pair(*kernel, 400);
    const double predicted =
        pair.h[x] * pair.pi.measure_of(A) / (pair.s * pair.s * pair.spectral.fp_R);
    const double oracle_limit = oracle.right[x] * oracle.left.measure_of(A);
    worst_limit = std::max(worst_limit, rel(predicted, oracle_limit));
  }
  detail = "max |R rho - 1| = " + fmt(worst_R_rho) +
           ", max rel limit err = " + fmt(worst_limit);
  return worst_R_rho <= 1e-8 && worst_limit <= 1e-6;
}

// --- 5. identity suite -----------------------------------------------------------

bool identity_suite_for(const AtomKernel& kernel, double tol, std::string& detail) {
  const SpectralReport spectral = classify(kernel, 200);
  const double R = spectral.R;
  const PowerSeries f = compute_fn(kernel, 200);
  const PowerSeries F = compute_Fn(kernel, 200);

  double worst14 = 0.0;
  for (int k = 1; k <= 10; ++k) {
    const double s = 0.08 * k * R;
    const double fv = f.eval(s).value;
    worst14 = std::max(worst14, std::abs(F.eval(s).value * (1.0 - fv) - fv));
  }

  double worst_pair = 0.0, worst_product = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const double s = 0.2 * k * R;  // five samples up to and including R
    const auto h = kernel.hs_function(s, 200);
    const auto pi = kernel.pis_measure(s, 200);
    const auto sub = check_subinvariance(kernel, s, h.fn, pi.mu, 200);
    worst_pair = std::max({worst_pair, sub.function_residual, sub.measure_residual});
    const double product = pi.mu.integrate(h.fn);
    worst_product =
        std::max(worst_product, std::abs(product - s * s * f.eval_derivative(s).value));
  }

  const auto hR = kernel.hs_function(R, 200);
  const auto piR = kernel.pis_measure(R, 200);
  const double norm_h = kernel.gamma().integrate(hR.fn);
  const double norm_g = piR.mu.integrate(kernel.g());

  detail += " eq14=" + fmt(worst14) + " lemma51=" + fmt(worst_pair) +
            " hpi=" + fmt(worst_product) + " norm=(" + fmt(norm_h) + "," + fmt(norm_g) + ")";
  return worst14 <= tol && worst_pair <= tol && worst_product <= tol &&
         close(norm_h, 1.0, 1e-8) && close(norm_g, 1.0, 1e-8);
}

bool criterion_identity_suite(std::string& detail) {
  Rng rng(424242);
  std::shared_ptr<DenseKernel> dense;
  {
    // a fixed well-conditioned 4-state kernel with a sizeable atom
    std::vector<std::vector<double>> M(4, std::vector<double>(4));
    for (auto& row : M)
      for (double& v : row) v = 0.2 + 0.8 * rng.uniform();
    std::vector<double> gamma{0.25, 0.25, 0.25, 0.25};
    std::vector<double> g(4);
    for (std::size_t i = 0; i < 4; ++i) {
      double cap = 1e300;
      for (std::size_t j = 0; j < 4; ++j) cap = std::min(cap, M[i][j] / gamma[j]);
      g[i] = 0.6 * cap;
    }
    dense = DenseKernel::from_full(TypeSpace::finite({"0", "1", "2", "3"}),
                                   Matrix::from_rows(M), g, gamma);
  }
  detail = "dense:";
  if (!identity_suite_for(*dense, 1e-10, detail)) return false;
  detail += " | quadrature:";
  auto twin = AnalyticKernel::create(2.0, 2.0, 0.2, 400, 20.0)->quadrature_twin();
  return identity_suite_for(*twin, 1e-6, detail);
}

// --- 6. renewal coefficient asymptotics -----------------------------------------

bool criterion_renewal_limit(std::string& detail) {
  std::vector<double> a(200, 0.0);
  a[0] = 0.5;
  a[1] = 0.5;
  std::vector<double> b(200, 0.0);
  b[0] = 1.0;
  const auto c = renewal_quotient(PowerSeries(a), PowerSeries(b), 200);
  detail = "c_200=" + fmt(c.coeff(200));
  if (!close(c.coeff(200), 2.0 / 3.0, 1e-6)) return false;

  // period-2 input: the sequence oscillates, its Cesaro mean settles at 1/2
  std::vector<double> a2(200, 0.0), b2(200, 0.0);
  a2[1] = 1.0;
  b2[1] = 1.0;
  const auto c2 = renewal_quotient(PowerSeries(a2), PowerSeries(b2), 200);
  double cesaro = 0.0;
  bool oscillates = true;
  for (std::size_t n = 1; n <= 200; ++n) {
    cesaro += c2.coeff(n);
    if (c2.coeff(n) != (n % 2 == 0 ? 1.0 : 0.0)) oscillates = false;
  }
  cesaro /= 200.0;
  detail += " cesaro=" + fmt(cesaro);
  return oscillates && close(cesaro, 0.5, 1e-2);
}

// --- 7. the rank-one counterexample ----------------------------------------------

bool criterion_counterexample(std::string& detail) {
  const double a1 = 0.8, a = 0.5;
  auto kernel = RankOneKernel::create(TypeSpace::finite({"0", "1", "2"}),
                                      {1.0, 0.5, 0.0}, {a1 / 2.0, a1, 0.0},
                                      {0.0, 0.0, 1.0}, {0.0, 0.0, a});
  const double R = 1.0 / a;

  // the verdict fails exactly on the pairs with g1(x) gamma1(A) > 0
  const double g1[] = {1.0, 0.5, 0.0};
  const double gamma1[] = {a1 / 2.0, a1, 0.0};
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) {
      const auto verdict = check_limit_applicability(
          *kernel, Point::at_site(x), SetDescriptor::of_sites({y}), R, 80);
      const bool grows = g1[x] * gamma1[y] > 0.0;
      if (verdict.extra_condition_empirical == grows) {
        detail = "verdict mismatch at (" + std::to_string(x) + "," + std::to_string(y) +
                 ")";
        return false;
      }
    }

  // gamma1(A) = 0: the scaled trace is constant and equals the prediction,
  // whose value is pinned by the brute-force matrix powers
  const auto A = SetDescriptor::of_sites({2});
  const auto good = check_limit_applicability(*kernel, Point::at_site(2), A, R, 80);
  if (!good.extra_condition_empirical) {
    detail = "expected a passing verdict on the vanishing stem";
    return false;
  }
  PerronLimitOptions options;
  options.n_max = 200;
  options.tol = 1e-10;
  const auto report = perron_limit(*kernel, Point::at_site(2), A, options);
  const Matrix M = kernel->full_matrix();
  const double brute = std::pow(R, 12.0) * M.power(12)(2, 2);
  detail = "limit=" + fmt(report.predicted_limit) + " brute=" + fmt(brute);
  if (!close(report.predicted_limit, brute, 1e-12)) return false;
  for (std::size_t n = 1; n < report.trace.size(); ++n)
    if (!close(report.trace[n], report.predicted_limit, 1e-11)) {
      detail += " trace not constant at n=" + std::to_string(n);
      return false;
    }
  return true;
}

// --- 8. Monte Carlo consistency ---------------------------------------------------

bool criterion_monte_carlo(std::string& detail) {
  const Preset analytic = build_analytic_preset({2.0, 2.0, 0.2, 400, 20.0});
  const SimBatch batch =
      estimate_series(analytic.reproduction, analytic.cluster, 100000, 6, 988);
  const double c = 0.2, r = 1.5;
  detail = "f1=" + fmt(batch.f_hat[0].mean) + "+-" + fmt(batch.f_hat[0].se) +
           " f2=" + fmt(batch.f_hat[1].mean) + "+-" + fmt(batch.f_hat[1].se);
  if (std::abs(batch.f_hat[0].mean - c) > 3.0 * batch.f_hat[0].se) return false;
  if (std::abs(batch.f_hat[1].mean - c / r) > 3.0 * batch.f_hat[1].se) return false;

  const Preset chain = build_preset("split-chain");
  const SpectralReport spectral = classify(*chain.kernel, 200);
  const GapSample gaps =
      regeneration_times(chain.reproduction, chain.cluster, 30000, 2000, 989);
  detail += " gap=" + fmt(gaps.mean) + "+-" + fmt(gaps.se) +
            " want=" + fmt(spectral.mean_generation_length);
  if (std::abs(gaps.mean - spectral.mean_generation_length) > 3.0 * gaps.se) return false;

  // seeded determinism: identical batches serialize identically
  const SimBatch again =
      estimate_series(analytic.reproduction, analytic.cluster, 100000, 6, 988);
  if (to_json(batch).dump() != to_json(again).dump()) {
    detail += " [determinism broken]";
    return false;
  }
  return true;
}

// --- 9. reference life-record replay ----------------------------------------------

bool criterion_life_record_replay(std::string& detail) {
  struct Script {
    std::deque<std::pair<int, int>> events{
        {1, 1}, {1, 1}, {0, 1}, {1, 1}, {1, 1}, {1, 2},
        {0, 0}, {1, 0}, {1, 2}, {0, 1},
    };
  };
  auto script = std::make_shared<Script>();
  ReproductionLaw law;
  law.sample = [script](double, Rng&) {
    Reproduction rep;
    auto [stem, clusters] = script->events.front();
    script->events.pop_front();
    for (int k = 0; k < stem; ++k) rep.stem_offspring.push_back(0.0);
    rep.cluster_count = static_cast<std::uint64_t>(clusters);
    return rep;
  };
  ClusterLaw cluster;
  cluster.sample = [](Rng&) { return ParticleList{0.0, 0.0, 0.0}; };
  Rng rng(0);
  const LifeRecord record = simulate_life_record(law, cluster, rng, 50);
  detail = "L=" + std::to_string(record.L) + " X=(";
  for (std::size_t n = 0; n < record.X.size(); ++n)
    detail += (n ? "," : "") + std::to_string(record.X[n]);
  detail += ")";
  const std::vector<std::uint64_t> want{3, 2, 2, 0, 2, 1};
  return record.L == 6 && !record.censored &&
         std::vector<std::uint64_t>(record.X.begin(), record.X.end()) == want;
}

}  // namespace

int main() {
  Harness harness;
  harness.run("closed-form spectral values r and R from the gridded kernel", 10.0,
              criterion_spectral_values);
  harness.run("criticality flips across c = 1/3", 10.0, criterion_criticality);
  harness.run("Perron limit traces on the continuous kernel", 60.0,
              criterion_perron_limit);
  harness.run("eigen-oracle equivalence on 100 random dense kernels", 30.0,
              criterion_oracle_equivalence);
  harness.run("renewal and subinvariance identity suite", 30.0, criterion_identity_suite);
  harness.run("renewal coefficient limit and the periodic counterexample", 10.0,
              criterion_renewal_limit);
  harness.run("rank-one counterexample separates the limit conditions", 10.0,
              criterion_counterexample);
  harness.run("Monte Carlo estimates and seeded determinism", 120.0,
              criterion_monte_carlo);
  harness.run("deterministic life-record replay", 10.0, criterion_life_record_replay);

  std::printf("%d/9 criteria passed\n", 9 - harness.failures);
  return harness.failures;
}

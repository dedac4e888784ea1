#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "kernelpf/asymptotics.hpp"
#include "kernelpf/atom_kernel.hpp"
#include "kernelpf/rng.hpp"

namespace kernelpf::testing {

inline SpacePtr states(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return TypeSpace::finite(labels);
}

inline std::shared_ptr<DenseKernel> dense_full(const std::vector<std::vector<double>>& M,
                                               std::vector<double> g,
                                               std::vector<double> gamma) {
  auto space = states(g.size());
  return DenseKernel::from_full(std::move(space), Matrix::from_rows(M), std::move(g),
                                std::move(gamma));
}

inline std::shared_ptr<DenseKernel> dense_parts(const std::vector<std::vector<double>>& m,
                                                std::vector<double> g,
                                                std::vector<double> gamma) {
  auto space = states(g.size());
  return DenseKernel::from_parts(std::move(space), Matrix::from_rows(m), std::move(g),
                                 std::move(gamma));
}

/// A pure-atom kernel (no stem): M = g (x) gamma with total atom mass a.
inline std::shared_ptr<DenseKernel> pure_atom(double a) {
  return dense_parts({{0.0}}, {a}, {1.0});
}

struct RandomAtomKernel {
  std::shared_ptr<DenseKernel> kernel;
  Matrix M;
};

/// Random irreducible aperiodic kernel with a valid atom and a certified
/// spectral gap between the stem and the full kernel (rho_m <= gap_cap *
/// rho_M), so that series at s = R are resolved within the truncation.
inline RandomAtomKernel random_atom_kernel(Rng& rng, std::size_t size,
                                           double gap_cap = 0.8) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<std::vector<double>> M(size, std::vector<double>(size));
    for (auto& row : M)
      for (double& v : row) v = 0.05 + 0.95 * rng.uniform();  // strictly positive
    std::vector<double> gamma(size);
    double total = 0.0;
    for (double& v : gamma) {
      v = 0.1 + rng.uniform();
      total += v;
    }
    for (double& v : gamma) v /= total;
    const double theta = 0.5 + 0.4 * rng.uniform();
    std::vector<double> g(size);
    for (std::size_t i = 0; i < size; ++i) {
      double cap = 1e300;
      for (std::size_t j = 0; j < size; ++j) cap = std::min(cap, M[i][j] / gamma[j]);
      g[i] = theta * cap;
    }
    auto kernel = dense_full(M, g, gamma);
    // certify the gap through the eigen oracle on the stem part
    const auto stem = kernel->stem_operator();
    double rho_m = 0.0;
    {
      std::vector<double> v(size, 1.0);
      for (int it = 0; it < 3000; ++it) {
        auto w = stem.apply(v);
        double norm = 0.0;
        for (double x : w) norm += std::abs(x);
        if (norm == 0.0) break;
        rho_m = norm;
        for (std::size_t i = 0; i < size; ++i) v[i] = w[i] / norm;
      }
    }
    const EigenOracle oracle = power_iteration_oracle(*kernel);
    if (rho_m <= gap_cap * oracle.rho) return {kernel, kernel->full_matrix()};
  }
  throw std::runtime_error("no gap-certified random kernel found");
}

/// The rank-one counterexample fixture: m = g1 (x) gamma1 with a1 > a > 0
/// and vanishing cross-integrals. (g1, gamma1) live on states {0,1} with
/// g1(0) gamma1({0}) != a1, so the iterate exponent is discriminated; the
/// atom (g, gamma) lives on state 2.
inline std::shared_ptr<RankOneKernel> rank_one_fixture(double a1 = 0.8, double a = 0.5) {
  return RankOneKernel::create(states(3), {1.0, 0.5, 0.0}, {a1 / 2.0, a1, 0.0},
                               {0.0, 0.0, 1.0}, {0.0, 0.0, a});
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace kernelpf::testing

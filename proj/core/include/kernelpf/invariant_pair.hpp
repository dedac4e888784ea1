#pragma once

#include <vector>

#include "kernelpf/atom_kernel.hpp"
#include "kernelpf/spectral.hpp"

namespace kernelpf {

/// h_s(x) = sum_{n=1}^{N} s^n Int g(y) m^{n-1}(x,dy), with tail diagnostics.
SeriesFunction compute_hs(const AtomKernel& kernel, double s, std::size_t N);

/// pi_s(A) = sum_{n=1}^{N} s^n Int m^{n-1}(x,A) gamma(dx).
SeriesMeasure compute_pis(const AtomKernel& kernel, double s, std::size_t N);

struct SubinvarianceReport {
  double f_s = 0.0;
  /// max_x | Int h(y)M(x,dy) - s^{-1} h(x) + (1-f(s)) g(x) |, divided by
  /// the local magnitude where that exceeds 1 (measures can carry
  /// exponentially large mass across the grid, so plain absolute residuals
  /// would only reflect rounding at the largest sites)
  double function_residual = 0.0;
  /// max over sites of the measure-side analogue, same scaling
  double measure_residual = 0.0;
  /// the same identity checked on intervals [0,t_k]
  /// (grid spaces only; equals the site check on finite spaces)
  double interval_residual = 0.0;
  bool invariant = false;  // f(s) = 1 within tolerance: exact invariance
};

/// Checks that (h, pi) is an s-subinvariant pair with the exact defect
/// (1 - f(s)) (g, gamma). Requires f(s) <= 1.
SubinvarianceReport check_subinvariance(const AtomKernel& kernel, double s,
                                        const TypeFunction& h, const Measure& pi,
                                        std::size_t N = 200);

struct InvariantPair {
  double s = 0.0;  // = R
  TypeFunction h;
  Measure pi;
  double f_of_s = 0.0;
  double hpi_product = 0.0;       // Int h dpi
  double expected_hpi = 0.0;      // R^2 f'(R)
  double h_gamma = 0.0;           // Int h dgamma (should be 1)
  double g_pi = 0.0;              // Int g dpi   (should be 1)
  bool certified = true;          // tail bounds below tolerance
  double tail_bound = 0.0;
  SpectralReport spectral;
};

/// The R-invariant pair (h, pi) at s = R, normalized so that
/// Int h dgamma = Int g dpi = 1, with Int h dpi = R^2 f'(R). Requires an
/// R-recurrent kernel (throws not-recurrent otherwise).
InvariantPair invariant_pair(const AtomKernel& kernel, std::size_t N = 200);

}  // namespace kernelpf

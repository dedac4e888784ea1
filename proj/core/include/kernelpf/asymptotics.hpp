#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kernelpf/atom_kernel.hpp"
#include "kernelpf/invariant_pair.hpp"

namespace kernelpf {

struct EigenOracle {
  double rho = 0.0;      // dominant eigenvalue
  TypeFunction right;    // positive right eigenvector, sup-normalized
  Measure left;          // positive left eigenvector, scaled so left.right = 1
};

/// Verification oracle for finite kernels: dominant eigenvalue and positive
/// left/right eigenvectors by power iteration, to |Mv - rho v|_inf <=
/// 1e-12 rho. Non-convergence (periodic kernels) raises a periodicity
/// error. With left.right = 1, the limit of rho^{-n} M^n is
/// right(x) * left(A) directly.
EigenOracle power_iteration_oracle(const AtomKernel& kernel,
                                   std::size_t max_iterations = 200000);

struct ResolventDecomposition {
  double lhs = 0.0;       // M_s(x,A), by iterating the full kernel
  double m_s = 0.0;       // m_s(x,A)
  double regeneration = 0.0;  // h_s(x) pi_s(A) / (1 - f(s))
  double residual = 0.0;  // |lhs - m_s - regeneration|
};

/// Both sides of the resolvent identity
/// M_s(x,A) = m_s(x,A) + h_s(x) pi_s(A) / (1-f(s)), computed from
/// independent routines. Requires f(s) < 1.
ResolventDecomposition resolvent_decomposition(const AtomKernel& kernel, double s,
                                               const Point& x, const SetDescriptor& A,
                                               std::size_t N = 200);

struct ApplicabilityVerdict {
  /// sufficient condition: h(x) finite and A inside {g >= eps} for some
  /// eps > 0 from the tested grid
  bool eps_condition = false;
  double g_infimum_on_A = 0.0;
  bool h_finite = true;
  /// empirical check of R^n m^n(x,A) -> 0: non-rigorous, finitely many
  /// iterates only
  bool extra_condition_empirical = false;
  double final_scaled_m = 0.0;
  std::string note;
};

/// Verdicts for the two applicability conditions of the Perron limit; the
/// empirical one is labelled as such and never treated as a proof.
ApplicabilityVerdict check_limit_applicability(const AtomKernel& kernel, const Point& x,
                                               const SetDescriptor& A, double R,
                                               std::size_t n_max = 500);

struct LimitReport {
  std::string x_desc;
  std::string set_desc;
  double R = 0.0;
  double predicted_limit = 0.0;  // h(x) pi(A) / (R^2 f'(R))
  std::vector<double> trace;     // R^n M^n(x,A), n = 0..n_max
  bool converged = false;
  ApplicabilityVerdict applicability;
  double sensitivity_dlimit_dR = 0.0;
  std::vector<double> cesaro;    // running Cesaro averages (when requested)
  bool cesaro_converged = false;
  std::vector<std::string> warnings;
  SpectralReport spectral;
};

struct PerronLimitOptions {
  std::size_t n_max = 500;
  std::size_t N = 200;
  double tol = 1e-6;
  /// Periodic kernels are refused unless the Cesaro-average variant is
  /// requested explicitly (a convention beyond the aperiodic theorem).
  bool cesaro = false;
};

/// The Perron-Frobenius limit R^n M^n(x,A) -> h(x) pi(A) / (R^2 f'(R)) for
/// aperiodic R-positive recurrent kernels: prediction, full trace, and the
/// convergence verdict (closeness plus decreasing increments; no rate is
/// available in general).
LimitReport perron_limit(const AtomKernel& kernel, const Point& x, const SetDescriptor& A,
                         const PerronLimitOptions& options = {});

}  // namespace kernelpf

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kernelpf/atom_kernel.hpp"
#include "kernelpf/power_series.hpp"

namespace kernelpf {

enum class RecurrenceClass { RTransient, RNullRecurrent, RPositiveRecurrent };
enum class RenewalClass { Transient, PositiveRecurrent, NullRecurrent };
enum class Criticality { Subcritical, Critical, Supercritical };

std::string to_string(RecurrenceClass c);
std::string to_string(RenewalClass c);
std::string to_string(Criticality c);

struct SpectralReport {
  double r = 0.0;                       // radius of convergence of f
  double R = 0.0;                       // convergence parameter
  double f_R = 0.0;                     // f(R)
  double fp_R = 0.0;                    // f'(R); +inf when declared infinite
  RecurrenceClass recurrence = RecurrenceClass::RTransient;
  RenewalClass renewal = RenewalClass::Transient;
  Criticality criticality = Criticality::Subcritical;
  double mean_generation_length = 0.0;  // R f'(R) when recurrent

  // truncation / reliability diagnostics
  std::size_t N = 0;
  double f_R_tail_bound = 0.0;
  double fp_R_tail_bound = 0.0;
  std::size_t support_gcd = 1;          // >1 flags a periodic coefficient lattice
  bool r_exact = false;                 // radius from a closed form
  std::vector<std::string> warnings;
};

/// f_n = Int Int g(y) m^{n-1}(x,dy) gamma(dx), n = 1..N, with the
/// a-posteriori checks on the standing assumption (some f_n > 0, finite
/// tail ratio).
PowerSeries compute_fn(const AtomKernel& kernel, std::size_t N);

/// F_n = Int Int g(y) M^{n-1}(x,dy) gamma(dx): the direct route through the
/// full kernel, independent of the renewal recursion f/(1-f).
PowerSeries compute_Fn(const AtomKernel& kernel, std::size_t N);

/// Full classification: radius, convergence parameter, recurrence class of
/// the kernel, recurrence class of the embedded renewal process,
/// criticality of the branching process, mean generation length.
SpectralReport classify(const AtomKernel& kernel, std::size_t N = 200);

struct ImmigrationSeries {
  PowerSeries tilde_f;
  PowerSeries tilde_F;
};

/// Generating-function data for a general starting measure mu0: the
/// embedded population has an immigration component with coefficients
/// tilde_f_n = Int Int g(y) m^{n-1}(x,dy) mu0(dx) and tilde_F computed
/// directly through the full kernel.
ImmigrationSeries immigration_series(const AtomKernel& kernel, const Measure& mu0,
                                     std::size_t N);

}  // namespace kernelpf

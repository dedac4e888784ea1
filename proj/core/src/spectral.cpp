#include "kernelpf/spectral.hpp"

#include <cmath>
#include <limits>

namespace kernelpf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCriticalityTol = 1e-9;
}

std::string to_string(RecurrenceClass c) {
  switch (c) {
    case RecurrenceClass::RTransient: return "R-transient";
    case RecurrenceClass::RNullRecurrent: return "R-null-recurrent";
    case RecurrenceClass::RPositiveRecurrent: return "R-positive-recurrent";
  }
  return "?";
}

std::string to_string(RenewalClass c) {
  switch (c) {
    case RenewalClass::Transient: return "transient";
    case RenewalClass::PositiveRecurrent: return "positive-recurrent";
    case RenewalClass::NullRecurrent: return "null-recurrent";
  }
  return "?";
}

std::string to_string(Criticality c) {
  switch (c) {
    case Criticality::Subcritical: return "subcritical";
    case Criticality::Critical: return "critical";
    case Criticality::Supercritical: return "supercritical";
  }
  return "?";
}

PowerSeries compute_fn(const AtomKernel& kernel, std::size_t N) {
  if (N < 1) throw PreconditionError("invalid-argument", "N must be at least 1");
  PowerSeries fs = kernel.fn_series(N);
  if (fs.last_nonzero() == 0)
    throw PreconditionError("degenerate-series",
                            "every f_n vanishes up to the truncation order");
  if (fs.diverging_tail_ratio())
    throw PreconditionError("radius-zero",
                            "f_n grows super-geometrically; the radius of convergence is 0");
  return fs;
}

PowerSeries compute_Fn(const AtomKernel& kernel, std::size_t N) {
  if (N < 1) throw PreconditionError("invalid-argument", "N must be at least 1");
  PowerSeries Fs = kernel.Fn_series(N);
  if (Fs.last_nonzero() == 0)
    throw PreconditionError("degenerate-series",
                            "every F_n vanishes up to the truncation order");
  return Fs;
}

namespace {

Criticality decide_criticality(const PowerSeries& fs, double R,
                               std::vector<std::string>& warnings) {
  const SeriesValue f1 = fs.eval(1.0);
  if (f1.value > 1.0 + kCriticalityTol) return Criticality::Supercritical;
  if (f1.certified && f1.value + f1.tail_bound < 1.0 - kCriticalityTol)
    return Criticality::Subcritical;
  if (f1.certified && f1.tail_bound <= 1e-10 &&
      std::abs(f1.value - 1.0) <= kCriticalityTol)
    return Criticality::Critical;
  // f(1) not resolvable from the truncated series; fall back to R itself
  warnings.push_back("criticality decided from R (f(1) not certified at truncation)");
  if (R < 1.0 - kCriticalityTol) return Criticality::Supercritical;
  if (R > 1.0 + kCriticalityTol) return Criticality::Subcritical;
  return Criticality::Critical;
}

}  // namespace

SpectralReport classify(const AtomKernel& kernel, std::size_t N) {
  SpectralReport report;
  report.N = N;

  const PowerSeries fs = compute_fn(kernel, N);
  report.support_gcd = fs.support_gcd();

  if (auto exact = kernel.exact_radius()) {
    report.r = *exact;
    report.r_exact = true;
  } else {
    const RadiusEstimate est = estimate_radius(fs);
    report.r = est.r;
    if (!est.reliable) report.warnings.push_back(est.warning);
  }

  const SolveRResult solved = solve_R(fs, report.r, kernel.f_at_radius());
  report.R = solved.R;
  report.f_R = solved.f_at_R.value;
  report.f_R_tail_bound = solved.f_at_R.tail_bound;

  if (solved.at_radius) {
    report.recurrence = RecurrenceClass::RTransient;
    report.renewal = RenewalClass::Transient;
    const SeriesValue fp = fs.eval_derivative(report.R);
    report.fp_R = fp.value;
    report.fp_R_tail_bound = fp.tail_bound;
  } else {
    const SeriesValue fp = fs.eval_derivative(report.R);
    report.fp_R_tail_bound = fp.tail_bound;
    if (fp.certified) {
      report.fp_R = fp.value;
      report.recurrence = RecurrenceClass::RPositiveRecurrent;
      report.renewal = RenewalClass::PositiveRecurrent;
      report.mean_generation_length = report.R * report.fp_R;
    } else if (fp.value > 1e8) {
      // lower-bound witness for a divergent derivative, not a proof
      report.fp_R = kInf;
      report.recurrence = RecurrenceClass::RNullRecurrent;
      report.renewal = RenewalClass::NullRecurrent;
      report.mean_generation_length = kInf;
      report.warnings.push_back(
          "f'(R) declared infinite from a lower-bound witness (partial sums > 1e8)");
    } else {
      throw InconclusiveError("inconclusive-at-radius",
                              "f'(R) cannot be certified within the truncation tail bound");
    }
  }

  report.criticality = decide_criticality(fs, report.R, report.warnings);
  return report;
}

ImmigrationSeries immigration_series(const AtomKernel& kernel, const Measure& mu0,
                                     std::size_t N) {
  if (!(mu0.total_mass() > 0.0) || !std::isfinite(mu0.total_mass()))
    throw PreconditionError("invalid-argument",
                            "starting measure must have positive finite mass");
  ImmigrationSeries out{kernel.fn_series_from(mu0, N), kernel.Fn_series_from(mu0, N)};
  if (out.tilde_f.last_nonzero() == 0)
    throw PreconditionError("degenerate-series",
                            "every immigration coefficient vanishes");
  return out;
}

}  // namespace kernelpf

#include "kernelpf/invariant_pair.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kernelpf {

SeriesFunction compute_hs(const AtomKernel& kernel, double s, std::size_t N) {
  if (!(s > 0.0) || N < 1)
    throw PreconditionError("invalid-argument", "compute_hs needs s > 0 and N >= 1");
  return kernel.hs_function(s, N);
}

SeriesMeasure compute_pis(const AtomKernel& kernel, double s, std::size_t N) {
  if (!(s > 0.0) || N < 1)
    throw PreconditionError("invalid-argument", "compute_pis needs s > 0 and N >= 1");
  return kernel.pis_measure(s, N);
}

SubinvarianceReport check_subinvariance(const AtomKernel& kernel, double s,
                                        const TypeFunction& h, const Measure& pi,
                                        std::size_t N) {
  const auto& space = kernel.space();
  require_same_space(h, space, "check_subinvariance");
  require_same_space(pi, space, "check_subinvariance");

  const PowerSeries fs = compute_fn(kernel, N);
  const SeriesValue f_s = fs.eval(s);
  if (f_s.value > 1.0 + 1e-9)
    throw PreconditionError("precondition", "subinvariance requires f(s) <= 1");

  SubinvarianceReport report;
  report.f_s = f_s.value;
  const double defect = 1.0 - f_s.value;

  // residuals are scaled by the local magnitude where it exceeds 1, so the
  // identity is held to machine precision even where the measures carry
  // exponentially large mass
  const auto scaled = [](double lhs, double mid, double low) {
    const double scale = std::max({1.0, std::abs(lhs), std::abs(mid)});
    return std::abs(lhs - mid + low) / scale;
  };

  // function side: Int h dM(x,.) = s^{-1} h(x) - (1-f(s)) g(x)
  const TypeFunction Mh = kernel.apply_M(h);
  for (std::size_t i = 0; i < space.site_count(); ++i) {
    report.function_residual =
        std::max(report.function_residual,
                 scaled(Mh[i], h[i] / s, defect * kernel.g()[i]));
  }

  // measure side, compared site-by-site in mass coordinates
  const Measure piM = kernel.adjoint_M(pi);
  for (std::size_t i = 0; i < space.site_count(); ++i) {
    report.measure_residual =
        std::max(report.measure_residual,
                 scaled(piM.masses()[i], pi.masses()[i] / s,
                        defect * kernel.gamma().masses()[i]));
  }

  // and on intervals [0, t_k] for grid spaces
  if (space.is_grid()) {
    const double T = space.upper_bound();
    for (int k = 1; k <= 8; ++k) {
      const auto set = SetDescriptor::interval(T * static_cast<double>(k) / 8.0);
      report.interval_residual =
          std::max(report.interval_residual,
                   scaled(piM.measure_of(set), pi.measure_of(set) / s,
                          defect * kernel.gamma().measure_of(set)));
    }
  } else {
    report.interval_residual = report.measure_residual;
  }

  report.invariant = std::abs(defect) <= 1e-9;
  return report;
}

InvariantPair invariant_pair(const AtomKernel& kernel, std::size_t N) {
  InvariantPair pair;
  pair.spectral = classify(kernel, N);
  if (pair.spectral.recurrence == RecurrenceClass::RTransient)
    throw PreconditionError("not-recurrent",
                            "the invariant pair exists for R-recurrent kernels only");
  const double R = pair.spectral.R;
  pair.s = R;

  const SeriesFunction h = kernel.hs_function(R, N);
  const SeriesMeasure pi = kernel.pis_measure(R, N);
  pair.h = h.fn;
  pair.pi = pi.mu;
  pair.f_of_s = pair.spectral.f_R;
  pair.tail_bound = std::max(h.tail_bound, pi.tail_bound);
  pair.certified = h.certified && pi.certified && pair.tail_bound < 1e-6;

  pair.h_gamma = kernel.gamma().integrate(pair.h);
  pair.g_pi = pair.pi.integrate(kernel.g());
  pair.hpi_product = pair.pi.integrate(pair.h);
  pair.expected_hpi = R * R * pair.spectral.fp_R;

  // values beyond 1e12 are reported as effectively infinite rather than
  // propagated into downstream arithmetic
  if (pair.hpi_product > 1e12)
    pair.hpi_product = std::numeric_limits<double>::infinity();
  return pair;
}

}  // namespace kernelpf

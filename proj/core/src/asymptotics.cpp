#include "kernelpf/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kernelpf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

EigenOracle power_iteration_oracle(const AtomKernel& kernel, std::size_t max_iterations) {
  if (!kernel.space().is_finite())
    throw unsupported_variant("the eigen oracle supports finite kernels only");
  const std::size_t n = kernel.space().site_count();

  Matrix M = kernel.stem_operator();
  M += Matrix::outer(kernel.g().values(), kernel.gamma().masses());

  // asymmetric positive start: a periodic kernel then oscillates instead of
  // accidentally starting on a symmetric eigenvector
  std::vector<double> v(n), u(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = u[i] = 1.0 + static_cast<double>(i + 1) / static_cast<double>(n + 1);

  // one normalized power step; returns true once |Mv - rho v|_inf <= 1e-12 rho
  const auto step = [n](const Matrix& op, bool transposed, std::vector<double>& vec,
                        double& rho_out) {
    std::vector<double> w = transposed ? op.apply_transposed(vec) : op.apply(vec);
    double norm = 0.0, prev_norm = 0.0;
    for (double x : w) norm += std::abs(x);
    for (double x : vec) prev_norm += std::abs(x);
    if (norm == 0.0)
      throw PreconditionError("periodicity", "kernel annihilated the iterate");
    const double rho = norm / prev_norm;
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(w[i] - rho * vec[i]));
    for (std::size_t i = 0; i < n; ++i) vec[i] = w[i] / norm;
    rho_out = rho;
    return err <= 1e-12 * rho;
  };

  double rho = 0.0, rho_left = 0.0;
  bool right_done = false, left_done = false;
  for (std::size_t it = 0; it < max_iterations && !(right_done && left_done); ++it) {
    if (!right_done) right_done = step(M, false, v, rho);
    if (!left_done) left_done = step(M, true, u, rho_left);
  }
  if (!right_done || !left_done)
    throw PreconditionError("periodicity",
                            "power iteration did not converge (periodic or near-periodic kernel)");

  // sup-normalize the right vector, then scale the left one to left.right = 1
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, x);
  for (double& x : v) x /= vmax;
  double uv = dot(u, v);
  for (double& x : u) x /= uv;

  EigenOracle oracle;
  oracle.rho = rho;
  oracle.right = TypeFunction(kernel.space_ptr(), std::move(v));
  oracle.left = Measure::from_masses(kernel.space_ptr(), std::move(u));
  return oracle;
}

ResolventDecomposition resolvent_decomposition(const AtomKernel& kernel, double s,
                                               const Point& x, const SetDescriptor& A,
                                               std::size_t N) {
  const PowerSeries fs = compute_fn(kernel, N);
  const SeriesValue f_s = fs.eval(s);
  // at f(s) -> 1 the regeneration term degenerates; refuse the margin too
  if (!(f_s.value < 1.0 - 1e-9))
    throw PreconditionError("precondition", "the resolvent identity requires f(s) < 1");

  ResolventDecomposition out;

  // left side: M_s by iterating the full kernel until increments vanish
  const std::size_t cap = std::max<std::size_t>(4 * N, 800);
  const auto scaled = kernel.scaled_iterates(KernelPart::Full, s, x, A, cap);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < scaled.size(); ++k) {
    acc += s * scaled[k];  // s^{k+1} M^k(x,A)
    if (k > 32 && s * std::abs(scaled[k]) < 1e-16 * std::max(1.0, std::abs(acc))) break;
  }
  out.lhs = acc;

  out.m_s = kernel.resolvent_m(s, x, A, cap);
  const SeriesFunction hs = kernel.hs_function(s, N);
  const SeriesMeasure pis = kernel.pis_measure(s, N);
  out.regeneration = hs.fn.value_at(x) * pis.mu.measure_of(A) / (1.0 - f_s.value);
  out.residual = std::abs(out.lhs - out.m_s - out.regeneration);
  return out;
}

ApplicabilityVerdict check_limit_applicability(const AtomKernel& kernel, const Point& x,
                                               const SetDescriptor& A, double R,
                                               std::size_t n_max) {
  ApplicabilityVerdict verdict;

  // sufficient condition: A inside a level set {g >= eps} and h(x) < inf
  if (const auto* analytic = dynamic_cast<const AnalyticKernel*>(&kernel)) {
    switch (A.kind) {
      case SetDescriptor::Kind::All:
        verdict.g_infimum_on_A = analytic->b() <= 0.0 ? analytic->c() : 0.0;
        break;
      case SetDescriptor::Kind::Interval:
        verdict.g_infimum_on_A =
            analytic->c() * std::exp(-analytic->b() * (analytic->b() > 0.0 ? A.t : 0.0));
        break;
      case SetDescriptor::Kind::Sites:
        verdict.g_infimum_on_A = kernel.g().min_over(A);
        break;
    }
  } else {
    verdict.g_infimum_on_A = kernel.g().min_over(A);
  }
  const SeriesFunction hs = kernel.hs_function(R, 200);
  const double h_x = hs.fn.value_at(x);
  verdict.h_finite = std::isfinite(h_x) && h_x < 1e12;
  verdict.eps_condition = verdict.h_finite && verdict.g_infimum_on_A >= 1e-8;

  // empirical route: the scaled stem iterates themselves
  const auto trace = kernel.scaled_iterates(KernelPart::StemOnly, R, x, A, n_max);
  verdict.final_scaled_m = trace.back();
  bool decreasing = true;
  for (std::size_t k = trace.size() - std::min<std::size_t>(trace.size(), 10);
       k + 1 < trace.size(); ++k)
    if (std::abs(trace[k + 1]) > std::abs(trace[k]) + 1e-14) decreasing = false;
  verdict.extra_condition_empirical =
      std::isfinite(verdict.final_scaled_m) && std::abs(verdict.final_scaled_m) < 1e-8 &&
      decreasing;
  verdict.note = "the iterate-decay verdict inspects finitely many terms and is not a proof";
  return verdict;
}

LimitReport perron_limit(const AtomKernel& kernel, const Point& x, const SetDescriptor& A,
                         const PerronLimitOptions& options) {
  LimitReport report;
  report.set_desc = A.to_string(kernel.space());
  report.x_desc = x.by_coordinate
                      ? std::to_string(x.x)
                      : (kernel.space().is_finite() ? kernel.space().labels()[x.site]
                                                    : std::to_string(kernel.space().coordinate(x.site)));

  report.spectral = classify(kernel, options.N);
  if (report.spectral.recurrence != RecurrenceClass::RPositiveRecurrent)
    throw PreconditionError("not-applicable",
                            "the Perron limit requires an R-positive recurrent kernel (got " +
                                to_string(report.spectral.recurrence) + ")");
  if (report.spectral.support_gcd > 1 && !options.cesaro)
    throw PreconditionError("periodicity",
                            "periodic coefficient lattice (gcd " +
                                std::to_string(report.spectral.support_gcd) +
                                "); request the Cesaro variant explicitly");
  const double R = report.spectral.R;
  report.R = R;

  const auto predicted_at = [&](double s) {
    const SeriesFunction h = kernel.hs_function(s, options.N);
    const SeriesMeasure pi = kernel.pis_measure(s, options.N);
    const PowerSeries fs = compute_fn(kernel, options.N);
    const double fp = fs.eval_derivative(s).value;
    return h.fn.value_at(x) * pi.mu.measure_of(A) / (s * s * fp);
  };
  report.predicted_limit = predicted_at(R);

  report.applicability = check_limit_applicability(kernel, x, A, R, options.n_max);
  if (!report.applicability.eps_condition) {
    if (report.applicability.extra_condition_empirical)
      report.warnings.push_back(
          "only the empirical iterate-decay verdict supports this (x,A); "
          "the sufficient level-set condition failed");
    else
      report.warnings.push_back(
          "neither applicability condition holds for this (x,A); the scaled "
          "iterates need not converge to the prediction");
  }

  report.trace = kernel.scaled_iterates(KernelPart::Full, R, x, A, options.n_max);

  // convergence: closeness at n_max plus non-increasing increments over the
  // last 10 steps (no rate is available, so both are required)
  const double close = std::abs(report.trace.back() - report.predicted_limit);
  bool decreasing = true;
  const double floor = 1e-13 * std::max(1.0, std::abs(report.trace.back()));
  for (std::size_t k = report.trace.size() - std::min<std::size_t>(report.trace.size(), 11);
       k + 2 < report.trace.size(); ++k) {
    const double d1 = std::abs(report.trace[k + 1] - report.trace[k]);
    const double d2 = std::abs(report.trace[k + 2] - report.trace[k + 1]);
    if (d2 > d1 + floor) decreasing = false;
  }
  report.converged = close <= options.tol && decreasing;

  if (options.cesaro) {
    report.cesaro.resize(report.trace.size());
    double acc = 0.0;
    for (std::size_t n = 0; n < report.trace.size(); ++n) {
      acc += report.trace[n];
      report.cesaro[n] = acc / static_cast<double>(n + 1);
    }
    report.cesaro_converged =
        std::abs(report.cesaro.back() - report.predicted_limit) <= options.tol;
  }

  // sensitivity of the prediction to the numerically determined R
  const double dR = 1e-6 * R;
  const double up = predicted_at(R + dR), down = predicted_at(R - dR);
  report.sensitivity_dlimit_dR = (up - down) / (2.0 * dR);
  return report;
}

}  // namespace kernelpf

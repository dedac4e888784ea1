#include "kernelpf/power_series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kernelpf/errors.hpp"

namespace kernelpf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PowerSeries::PowerSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  for (double c : coeffs_)
    if (!(c >= 0.0))
      throw PreconditionError("negative-coefficient",
                              "power series coefficients must be non-negative");
}

std::size_t PowerSeries::last_nonzero() const {
  for (std::size_t n = coeffs_.size(); n >= 1; --n)
    if (coeffs_[n - 1] != 0.0) return n;
  return 0;
}

bool PowerSeries::is_polynomial() const {
  const std::size_t last = last_nonzero();
  return last > 0 && last < coeffs_.size();
}

std::size_t PowerSeries::support_gcd() const {
  std::size_t g = 0;
  for (std::size_t n = 1; n <= coeffs_.size(); ++n)
    if (coeffs_[n - 1] != 0.0) g = std::gcd(g, n);
  return g == 0 ? 1 : g;
}

namespace {

/// Coefficient-ratio model along the support lattice: the last observed
/// ratio, a two-level Richardson extrapolation of its limit (removes the
/// alpha/n and beta/n^2 terms in c_{n+1}/c_n ~ q (1 - alpha/n + ...)), and
/// the algebraic correction exponent alpha itself. The extrapolated limit
/// is the honest q for geometric tail bounds: raw last ratios under-state
/// the tail whenever the ratio sequence still climbs toward its limit.
struct RatioModel {
  bool valid = false;
  double q_last = 0.0;
  double q_limit = 0.0;
  double alpha = 0.0;
  double envelope = 0.0;  // max |q_n - q_limit| over the fit window
  bool monotone_increasing = false;
};

RatioModel fit_ratio_model(const std::vector<double>& coeffs) {
  RatioModel model;
  std::vector<std::size_t> support;
  for (std::size_t n = 1; n <= coeffs.size(); ++n)
    if (coeffs[n - 1] > 0.0) support.push_back(n);
  if (support.size() < 4) return model;
  std::size_t step = 0;
  for (std::size_t k = 1; k < support.size(); ++k)
    step = std::gcd(step, support[k] - support[k - 1]);
  if (step == 0) return model;

  std::vector<double> n_at, q_at;
  for (std::size_t k = 0; k + 1 < support.size(); ++k) {
    if (support[k + 1] - support[k] != step) continue;
    n_at.push_back(static_cast<double>(support[k + 1]));
    q_at.push_back(std::pow(coeffs[support[k + 1] - 1] / coeffs[support[k] - 1],
                            1.0 / static_cast<double>(step)));
  }
  if (q_at.size() < 3) return model;
  const std::size_t window = std::min<std::size_t>(q_at.size(), 12);
  const std::size_t from = q_at.size() - window;

  std::vector<double> n1, r1;
  for (std::size_t k = from + 1; k < q_at.size(); ++k) {
    r1.push_back((n_at[k] * q_at[k] - n_at[k - 1] * q_at[k - 1]) /
                 (n_at[k] - n_at[k - 1]));
    n1.push_back(n_at[k]);
  }
  std::vector<double> r2;
  for (std::size_t k = 1; k < r1.size(); ++k) {
    const double a = n1[k] * n1[k], b = n1[k - 1] * n1[k - 1];
    r2.push_back((a * r1[k] - b * r1[k - 1]) / (a - b));
  }
  model.valid = true;
  model.q_last = q_at.back();
  model.q_limit = !r2.empty() ? r2.back() : (!r1.empty() ? r1.back() : q_at.back());
  if (!(model.q_limit > 0.0)) model.q_limit = model.q_last;

  // alpha from ratio_n ~ q (1 - alpha/n)
  if (model.q_limit > 0.0) {
    double alpha_acc = 0.0;
    std::size_t alpha_count = 0;
    for (std::size_t k = q_at.size() - std::min<std::size_t>(q_at.size(), 4);
         k < q_at.size(); ++k) {
      alpha_acc += n_at[k] * (1.0 - q_at[k] / model.q_limit);
      ++alpha_count;
    }
    model.alpha = alpha_acc / static_cast<double>(alpha_count);
  }
  model.monotone_increasing = true;
  for (std::size_t k = from + 1; k < q_at.size(); ++k)
    if (q_at[k] < q_at[k - 1] * (1.0 - 1e-12)) model.monotone_increasing = false;
  for (std::size_t k = from; k < q_at.size(); ++k)
    model.envelope = std::max(model.envelope, std::abs(q_at[k] - model.q_limit));
  return model;
}

}  // namespace

std::optional<double> PowerSeries::tail_ratio() const {
  if (exact_tail_ratio_) return exact_tail_ratio_;
  if (is_polynomial() || last_nonzero() == 0) return std::nullopt;
  const RatioModel model = fit_ratio_model(coeffs_);
  if (!model.valid) return std::nullopt;
  return model.q_limit;
}

namespace {

struct TailOutcome {
  double bound = kInf;
  bool certified = false;
};

/// Working q values for the tail branches. The geometric branch uses the
/// worse of the last observed and the extrapolated limit ratio, inflated by
/// the (capped) residual drift between them: a still-drifting ratio
/// sequence pins its limit only to about the drift, so borderline q just
/// below 1 falls out of certification instead of producing an optimistic
/// bound. The algebraic branch is gated on the uninflated estimate (it
/// describes the regime q s ~ 1 and carries its own margin).
struct GuardedQ {
  double geometric = 0.0;
  double raw = 0.0;
};

GuardedQ guarded_q(const RatioModel& model, double s) {
  const double base = std::max(model.q_last, model.q_limit);
  const double drift = model.q_limit > 0.0 ? model.envelope / model.q_limit : 0.0;
  return {base * (1.0 + std::min(drift, 0.5)) * s, base * s};
}

TailOutcome tail_for(const std::vector<double>& coeffs,
                     const std::optional<double>& exact_ratio, double last_term,
                     double s, double N) {
  if (!(last_term > 0.0)) return {0.0, true};
  if (exact_ratio) {
    const double q = *exact_ratio * s;
    if (q < 0.999) return {last_term * q / (1.0 - q), true};
    return {kInf, false};
  }
  const RatioModel model = fit_ratio_model(coeffs);
  if (!model.valid) return {kInf, false};
  const GuardedQ q = guarded_q(model, s);
  if (q.geometric < 0.999) return {last_term * q.geometric / (1.0 - q.geometric), true};
  if (q.raw < 1.001 && model.alpha > 1.1)
    return {1.5 * last_term * N / (model.alpha - 1.0), true};
  return {kInf, false};
}

}  // namespace

SeriesValue PowerSeries::eval(double s) const {
  SeriesValue out;
  double p = 1.0;
  for (double c : coeffs_) {
    p *= s;
    out.value += c * p;
  }
  if (is_polynomial() || last_nonzero() == 0) {
    out.tail_bound = 0.0;
    return out;
  }
  const TailOutcome tail = tail_for(coeffs_, exact_tail_ratio_, coeffs_.back() * p, s,
                                    static_cast<double>(coeffs_.size()));
  out.tail_bound = tail.bound;
  out.certified = tail.certified;
  return out;
}

SeriesValue PowerSeries::eval_derivative(double s) const {
  SeriesValue out;
  double p = 1.0;  // s^{n-1}
  for (std::size_t n = 1; n <= coeffs_.size(); ++n) {
    out.value += static_cast<double>(n) * coeffs_[n - 1] * p;
    p *= s;
  }
  if (is_polynomial() || last_nonzero() == 0) {
    out.tail_bound = 0.0;
    return out;
  }
  // bound sum_{n>N} n c_n s^{n-1} = (1/s) sum (n/N) N c_n s^n through the
  // same model with one extra power of n folded into the alpha exponent
  const double N = static_cast<double>(coeffs_.size());
  const double last_term = N * coeffs_.back() * p / s;
  if (exact_tail_ratio_) {
    const double q = *exact_tail_ratio_ * s;
    if (q < 0.999) {
      const double cNsN1 = coeffs_.back() * p / s;
      out.tail_bound = cNsN1 * (N * q / (1.0 - q) + q / ((1.0 - q) * (1.0 - q)));
      return out;
    }
    out.tail_bound = kInf;
    out.certified = false;
    return out;
  }
  RatioModel model = fit_ratio_model(coeffs_);
  if (!model.valid) {
    out.tail_bound = kInf;
    out.certified = false;
    return out;
  }
  model.alpha -= 1.0;  // the extra factor n shifts the algebraic exponent
  const GuardedQ q = guarded_q(model, s);
  if (q.geometric < 0.999) {
    const double cNsN1 = coeffs_.back() * p / s;
    const double qg = q.geometric;
    out.tail_bound = cNsN1 * (N * qg / (1.0 - qg) + qg / ((1.0 - qg) * (1.0 - qg)));
  } else if (q.raw < 1.001 && model.alpha > 1.1) {
    out.tail_bound = 1.5 * last_term * N / (model.alpha - 1.0);
  } else {
    out.tail_bound = kInf;
    out.certified = false;
  }
  return out;
}

bool PowerSeries::diverging_tail_ratio() const {
  std::vector<double> ratios;
  std::vector<double> at;
  for (std::size_t n = 1; n + 1 <= coeffs_.size(); ++n)
    if (coeffs_[n - 1] > 0.0 && coeffs_[n] > 0.0) {
      ratios.push_back(coeffs_[n] / coeffs_[n - 1]);
      at.push_back(static_cast<double>(n));
    }
  if (ratios.size() < 10) return false;
  // super-geometric growth: ratios keep climbing without an asymptote over
  // the trailing half of the support (a geometric-with-correction series
  // has ratios converging, so their growth factor tends to 1)
  const std::size_t from = ratios.size() / 2;
  bool monotone = true;
  for (std::size_t k = from + 1; k < ratios.size(); ++k)
    if (ratios[k] <= ratios[k - 1]) monotone = false;
  return monotone && ratios.back() > 2.0 * ratios[from] && ratios.back() > 1.0;
}

RadiusEstimate estimate_radius(const PowerSeries& fs) {
  RadiusEstimate est;
  const std::size_t last = fs.last_nonzero();
  if (last == 0)
    throw PreconditionError("degenerate-series", "all series coefficients vanish");
  if (fs.is_polynomial()) {
    est.r = kInf;
    return est;
  }
  if (fs.diverging_tail_ratio()) {
    est.r = 0.0;
    est.reliable = false;
    est.warning = "super-geometric coefficient growth; radius of convergence is zero";
    return est;
  }

  std::vector<std::size_t> support;
  for (std::size_t n = 1; n <= fs.order(); ++n)
    if (fs.coeff(n) > 0.0) support.push_back(n);
  if (support.size() < 5) {
    est.reliable = false;
    est.warning = "fewer than 5 nonzero coefficients; ratio estimate unavailable";
    const auto ratio = fs.tail_ratio();
    est.r = ratio && *ratio > 0.0 ? 1.0 / *ratio : kInf;
    return est;
  }

  std::size_t step = 0;
  for (std::size_t k = 1; k < support.size(); ++k)
    step = std::gcd(step, support[k] - support[k - 1]);

  // per-index ratio samples (c_{n+step}/c_n)^{1/step} along the support
  std::vector<double> n_at, q_at;
  for (std::size_t k = 0; k + 1 < support.size(); ++k) {
    const std::size_t n0 = support[k];
    const std::size_t n1 = support[k + 1];
    if (n1 - n0 != step) continue;
    const double q = std::pow(fs.coeff(n1) / fs.coeff(n0),
                              1.0 / static_cast<double>(step));
    n_at.push_back(static_cast<double>(n1));
    q_at.push_back(q);
  }
  const std::size_t window = std::min<std::size_t>(q_at.size(), 12);
  n_at.erase(n_at.begin(), n_at.end() - static_cast<long>(window));
  q_at.erase(q_at.begin(), q_at.end() - static_cast<long>(window));

  // Richardson level 1 removes the alpha/n term: (n2 q2 - n1 q1)/(n2 - n1)
  std::vector<double> n1v, r1;
  for (std::size_t k = 1; k < q_at.size(); ++k) {
    r1.push_back((n_at[k] * q_at[k] - n_at[k - 1] * q_at[k - 1]) /
                 (n_at[k] - n_at[k - 1]));
    n1v.push_back(n_at[k]);
  }
  // level 2 removes the beta/n^2 term
  std::vector<double> r2;
  for (std::size_t k = 1; k < r1.size(); ++k) {
    const double a = n1v[k] * n1v[k], b = n1v[k - 1] * n1v[k - 1];
    r2.push_back((a * r1[k] - b * r1[k - 1]) / (a - b));
  }
  const std::vector<double>& smoothed = r2.size() >= 2 ? r2 : (r1.size() >= 2 ? r1 : q_at);

  const double q_final = smoothed.back();
  if (!(q_final > 0.0)) {
    est.reliable = false;
    est.warning = "ratio sequence collapsed to zero; estimate unreliable";
    est.r = kInf;
    return est;
  }
  est.r = 1.0 / q_final;

  // oscillation diagnostic over the smoothed tail
  double spread = 0.0;
  const std::size_t tail = std::min<std::size_t>(smoothed.size(), 4);
  for (std::size_t k = smoothed.size() - tail; k < smoothed.size(); ++k)
    spread = std::max(spread, std::abs(smoothed[k] - q_final));
  if (spread > 1e-3 * q_final) {
    est.reliable = false;
    est.warning = "oscillating coefficient ratios; radius estimate unreliable";
  }
  return est;
}

SolveRResult solve_R(const PowerSeries& fs, double r,
                     std::optional<double> f_at_radius_hint) {
  if (fs.last_nonzero() == 0)
    throw PreconditionError("degenerate-series", "series is identically zero");

  const auto f = [&fs](double s) { return fs.eval(s); };

  bool root_side;  // true when f reaches 1 inside (0, r]
  if (f_at_radius_hint) {
    root_side = *f_at_radius_hint >= 1.0;
  } else if (std::isinf(r)) {
    root_side = true;  // polynomial with positive mass grows without bound
  } else {
    const SeriesValue at_r = f(r);
    if (at_r.value >= 1.0) {
      root_side = true;  // partial sum is already a certified lower bound
    } else if (at_r.certified && at_r.value + at_r.tail_bound < 1.0) {
      root_side = false;
    } else {
      throw InconclusiveError(
          "inconclusive-at-radius",
          "f(r) cannot be resolved within the truncation tail bound; candidates: "
          "R=r (transient) with partial f(r)=" + std::to_string(at_r.value) +
          ", or the root of f(R)=1 at the radius");
    }
  }

  SolveRResult out;
  if (!root_side) {
    out.R = r;
    out.f_at_R = f(r);
    out.at_radius = true;
    return out;
  }

  double hi = r;
  if (std::isinf(r)) {
    hi = 1.0;
    while (f(hi).value < 1.0) {
      hi *= 2.0;
      if (hi > 1e12)
        throw InconclusiveError("inconclusive-at-radius",
                                "f never reaches 1 on a bounded bracket");
    }
  }
  double lo = 0.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid).value < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  out.R = 0.5 * (lo + hi);
  out.f_at_R = f(out.R);
  // the root claim |f(R)-1| <= 1e-12 is about the full series: both the
  // partial-sum residual and the tail bound must sit inside the tolerance
  if (std::abs(out.f_at_R.value - 1.0) > 1e-12 || !out.f_at_R.certified ||
      out.f_at_R.tail_bound > 1e-12)
    throw InconclusiveError(
        "inconclusive-at-radius",
        "root of f(R)=1 cannot be certified to 1e-12 at truncation order " +
            std::to_string(fs.order()) + "; a larger N may resolve it");
  return out;
}

PowerSeries renewal_quotient(const PowerSeries& a, const PowerSeries& b, std::size_t N) {
  if (a.order() < N || b.order() < N)
    throw dimension_mismatch("renewal_quotient needs inputs truncated to at least N terms");
  std::vector<double> c(N, 0.0);
  for (std::size_t n = 1; n <= N; ++n) {
    double acc = b.coeff(n);
    for (std::size_t k = 1; k < n; ++k) acc += a.coeff(k) * c[n - k - 1];
    c[n - 1] = acc;
  }
  return PowerSeries(std::move(c));
}

}  // namespace kernelpf

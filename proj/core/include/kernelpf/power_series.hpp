#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace kernelpf {

/// A series value together with the geometric tail bound c_N q/(1-q),
/// q = tail_ratio * s. Equality claims are refused when the bound exceeds
/// the working tolerance (certified = false).
///
/// The bound is rigorous when the tail ratio is pinned exactly (closed-form
/// variants) or the series is a polynomial; otherwise q comes from a
/// Richardson-extrapolated ratio model, inflated by the still-observed
/// drift, and the certificate is model-based: strong at a clear geometric
/// gap, refused near q s = 1 (finite data cannot bound an arbitrary tail).
struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
  bool certified = true;
};

/// Truncated power series c_1 s + c_2 s^2 + ... + c_N s^N with non-negative
/// coefficients. coeff(n) is 1-based; there is no constant term (the
/// generating functions handled here all vanish at 0).
class PowerSeries {
public:
  PowerSeries() = default;
  explicit PowerSeries(std::vector<double> coeffs);

  std::size_t order() const { return coeffs_.size(); }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double coeff(std::size_t n) const { return coeffs_.at(n - 1); }

  /// True when the trailing coefficients are exactly zero, i.e. the series
  /// is a polynomial and the truncation is exact.
  bool is_polynomial() const;
  std::size_t last_nonzero() const;  // 0 when all coefficients vanish

  /// gcd of the indices carrying mass; >1 flags a periodic coefficient
  /// lattice (blocks the Perron limit).
  std::size_t support_gcd() const;

  /// Estimated limit of c_{n+1}/c_n (on the support lattice); absent for
  /// polynomials and for series with too little support.
  std::optional<double> tail_ratio() const;
  /// Closed-form variants pin the exact ratio; bounds then become exact.
  void set_exact_tail_ratio(double ratio) { exact_tail_ratio_ = ratio; }

  /// Sum c_n s^n in ascending order, with the geometric tail bound.
  SeriesValue eval(double s) const;
  /// Sum n c_n s^{n-1} (term-wise derivative), with its tail bound.
  SeriesValue eval_derivative(double s) const;

  /// Heuristic for super-geometric coefficient growth (radius zero).
  bool diverging_tail_ratio() const;

private:
  std::vector<double> coeffs_;
  std::optional<double> exact_tail_ratio_;
};

struct RadiusEstimate {
  double r = 0.0;
  bool reliable = true;
  std::string warning;
};

/// Radius of convergence by the coefficient ratio test with two levels of
/// Richardson smoothing (removes the 1/n and 1/n^2 terms of the ratio
/// asymptotics). Polynomials give r = infinity.
RadiusEstimate estimate_radius(const PowerSeries& fs);

struct SolveRResult {
  double R = 0.0;
  SeriesValue f_at_R;
  bool at_radius = false;  // R == r with f(r) < 1 certified (transient side)
};

/// The convergence parameter: R = r when f(r) < 1 (certified by the tail
/// bound), otherwise the unique root of f(R) = 1 in (0, r], located by
/// bisection to |f(R)-1| <= 1e-12. When f(r) cannot be resolved within the
/// tail bound, throws inconclusive-at-radius carrying both candidates.
///
/// `f_at_radius_hint` lets closed-form variants pin f(r) (e.g. +infinity).
SolveRResult solve_R(const PowerSeries& fs, double r,
                     std::optional<double> f_at_radius_hint = {});

/// Coefficients of c(s) = b(s)/(1-a(s)) via the renewal recursion
/// c_n = b_n + sum_{k=1}^{n-1} a_k c_{n-k} (no constant terms here). For an
/// aperiodic a with a(1)=1 and finite a'(1), c_n -> b(1)/a'(1).
PowerSeries renewal_quotient(const PowerSeries& a, const PowerSeries& b, std::size_t N);

}  // namespace kernelpf

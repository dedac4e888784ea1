#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kernelpf/matrix.hpp"
#include "kernelpf/measure.hpp"
#include "kernelpf/power_series.hpp"
#include "kernelpf/type_space.hpp"

namespace kernelpf {

enum class KernelVariant { DenseMatrix, DensityQuadrature, AnalyticExample, RankOneRemark };

enum class KernelPart { StemOnly, Full };  // m, or M = m + g (x) gamma

std::string to_string(KernelVariant v);

struct ValidationReport {
  bool valid = true;
  double max_residual = 0.0;       // |M - m - g (x) gamma| over sampled entries
  double clamped_negative = 0.0;   // largest negativity clamped to zero
  std::vector<std::string> warnings;
};

/// A function produced as a truncated series, with its tail diagnostics.
struct SeriesFunction {
  TypeFunction fn;
  double tail_bound = 0.0;
  bool certified = true;
  std::size_t terms = 0;
};

struct SeriesMeasure {
  Measure mu;
  double tail_bound = 0.0;
  bool certified = true;
  std::size_t terms = 0;
};

/// Non-negative kernel with an atom: M(x,A) = m(x,A) + g(x) gamma(A).
///
/// The base class stores the discretized stem operator (one mass-vector
/// matrix over the sites) and implements every operation through it; the
/// atom decomposition is then exact in the discrete system, so the renewal
/// and invariance identities hold to machine precision on any variant.
/// Closed-form variants override the virtual hooks with exact evaluators.
class AtomKernel {
public:
  virtual ~AtomKernel() = default;

  KernelVariant variant() const { return variant_; }
  bool uses_quadrature() const { return variant_ == KernelVariant::DensityQuadrature; }
  const TypeSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const TypeFunction& g() const { return g_; }
  const Measure& gamma() const { return gamma_; }
  /// Stem operator in mass convention: entry (i,j) is m(x_i, {site j}).
  const Matrix& stem_operator() const { return m_op_; }

  std::size_t site_of(const Point& p) const;

  // --- kernel action -------------------------------------------------------

  /// x -> Int h(y) m(x,dy)
  virtual TypeFunction apply_m(const TypeFunction& h) const;
  /// x -> Int h(y) M(x,dy)
  TypeFunction apply_M(const TypeFunction& h) const;

  /// A -> Int m(x,A) mu(dx)
  virtual Measure adjoint_m(const Measure& mu) const;
  /// A -> Int M(x,A) mu(dx)
  Measure adjoint_M(const Measure& mu) const;

  /// x -> m(x,A) (resp. M(x,A)) as a function.
  virtual TypeFunction set_function(KernelPart part, const SetDescriptor& A) const;

  /// k^n(x,A) with k^0(x,A) = delta_x(A).
  virtual double iterate(KernelPart part, std::size_t n, const Point& x,
                         const SetDescriptor& A) const;

  /// The scaled iterates s^n k^n(x,A) for n = 0..n_max (overflow-safe).
  virtual std::vector<double> scaled_iterates(KernelPart part, double s, const Point& x,
                                              const SetDescriptor& A,
                                              std::size_t n_max) const;

  // --- generating-function data --------------------------------------------

  /// f_n = Int Int g(y) m^{n-1}(x,dy) gamma(dx), n = 1..N.
  virtual PowerSeries fn_series(std::size_t N) const;
  /// F_n = Int Int g(y) M^{n-1}(x,dy) gamma(dx), n = 1..N (direct M route).
  virtual PowerSeries Fn_series(std::size_t N) const;
  /// Immigration coefficients against a starting measure mu0 (m / M route).
  virtual PowerSeries fn_series_from(const Measure& mu0, std::size_t N) const;
  virtual PowerSeries Fn_series_from(const Measure& mu0, std::size_t N) const;

  /// Closed-form variants pin the radius of convergence of f.
  virtual std::optional<double> exact_radius() const { return std::nullopt; }
  /// And the value of f at the radius (+infinity allowed).
  virtual std::optional<double> f_at_radius() const { return std::nullopt; }

  // --- s-subinvariant pair series -------------------------------------------

  /// h_s(x) = sum_{n>=1} s^n Int g(y) m^{n-1}(x,dy)
  virtual SeriesFunction hs_function(double s, std::size_t N) const;
  /// pi_s(A) = sum_{n>=1} s^n Int m^{n-1}(x,A) gamma(dx)
  virtual SeriesMeasure pis_measure(double s, std::size_t N) const;

  /// m_s(x,A) = sum_{n>=1} s^n m^{n-1}(x,A); adaptive truncation with the
  /// increments themselves as the stopping diagnostic.
  virtual double resolvent_m(double s, const Point& x, const SetDescriptor& A,
                             std::size_t n_cap) const;

  /// Verifies the decomposition M = m + g (x) gamma on the representable
  /// entries, non-negativity of m, positivity of gamma and g.
  virtual ValidationReport validate(double tol) const;

  /// Grid-truncation diagnostic for kernels living on [0,T] (0 for finite).
  virtual double truncation_error() const { return 0.0; }

protected:
  AtomKernel(KernelVariant variant, SpacePtr space, TypeFunction g, Measure gamma)
      : variant_(variant), space_(std::move(space)), g_(std::move(g)),
        gamma_(std::move(gamma)) {}

  TypeFunction function_from(std::vector<double> values) const {
    return TypeFunction(space_, std::move(values));
  }

  KernelVariant variant_;
  SpacePtr space_;
  TypeFunction g_;
  Measure gamma_;
  Matrix m_op_;  // discretized stem action over sites
};

using KernelPtr = std::shared_ptr<const AtomKernel>;

// --- concrete variants -------------------------------------------------------

/// Finite type space, kernels as plain matrices.
class DenseKernel : public AtomKernel {
public:
  /// From the full kernel: m is derived as M - g (x) gamma. Entries of m in
  /// [-tol, 0) are clamped to zero; below -tol the atom is invalid.
  static std::shared_ptr<DenseKernel> from_full(SpacePtr space, const Matrix& M,
                                                std::vector<double> g,
                                                std::vector<double> gamma,
                                                double tol = 1e-10);
  static std::shared_ptr<DenseKernel> from_parts(SpacePtr space, Matrix m,
                                                 std::vector<double> g,
                                                 std::vector<double> gamma);

  /// Full kernel M = m + g (x) gamma as a matrix.
  Matrix full_matrix() const;

  ValidationReport validate(double tol) const override;

private:
  DenseKernel(SpacePtr space, Matrix m, std::vector<double> g, std::vector<double> gamma);
  friend class RankOneKernel;
  ValidationReport build_report_;
};

/// The rank-one stem kernel m = g1 (x) gamma1 with vanishing cross-integrals
/// against the atom (g, gamma); the fixture for the role of the vanishing
/// condition on R^n m^n. Realized on a finite space, so all algebra is exact.
class RankOneKernel : public AtomKernel {
public:
  static std::shared_ptr<RankOneKernel> create(SpacePtr space, std::vector<double> g1,
                                               std::vector<double> gamma1,
                                               std::vector<double> g,
                                               std::vector<double> gamma,
                                               double tol = 1e-10);

  double a1() const { return a1_; }
  double a() const { return a_; }
  Matrix full_matrix() const;

  ValidationReport validate(double tol) const override;

private:
  RankOneKernel(SpacePtr space, std::vector<double> g1, std::vector<double> gamma1,
                std::vector<double> g, std::vector<double> gamma);
  std::vector<double> g1_, gamma1_;
  double a1_ = 0.0, a_ = 0.0;
};

/// Grid space with the stem kernel given by a density sampled at (site,
/// node) pairs; composite trapezoid in the node direction. Point masses are
/// exact additive terms carried by measures, never smeared onto the grid.
class QuadratureKernel : public AtomKernel {
public:
  static std::shared_ptr<QuadratureKernel> from_sampled_density(
      SpacePtr space, const Matrix& density, std::vector<double> g, Measure gamma);

  /// Discretized twin of a closed-form kernel: the density evaluator is
  /// integrated row-wise with trapezoid weights restricted to the support
  /// {y >= x} (half weight at the leading discontinuity).
  static std::shared_ptr<QuadratureKernel> from_triangular_density(
      SpacePtr space, const std::function<double(double, double)>& density,
      const std::function<double(double)>& gfn, Measure gamma);

  ValidationReport validate(double tol) const override;
  double truncation_error() const override { return truncation_error_; }

private:
  QuadratureKernel(SpacePtr space, Matrix m_op, std::vector<double> g, Measure gamma);
  Matrix density_;  // as sampled, for validation
  double truncation_error_ = 0.0;
};

/// The three-parameter closed-form kernel on E = [0,inf):
///   m(x,dy) = a e^{x-y} 1{y>=x} dy,  g(x) = c e^{-bx},  gamma = delta_0,
/// with a,c > 0, b > -1. Every spectral quantity has an exact evaluator
/// (the exponential family e^{-beta x} is invariant under the stem kernel);
/// the carried grid only hosts sampled representations and the generic
/// fallback for functions without closed form.
class AnalyticKernel : public AtomKernel {
public:
  static std::shared_ptr<AnalyticKernel> create(double a, double b, double c,
                                                SpacePtr grid_space);
  /// Grid defaulted per the truncation rule e^{-min(1,1+b) T} < 1e-12.
  static std::shared_ptr<AnalyticKernel> create(double a, double b, double c,
                                                std::size_t node_count = 400,
                                                std::optional<double> T = {});

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double r() const { return r_; }

  TypeFunction apply_m(const TypeFunction& h) const override;
  Measure adjoint_m(const Measure& mu) const override;
  TypeFunction set_function(KernelPart part, const SetDescriptor& A) const override;
  double iterate(KernelPart part, std::size_t n, const Point& x,
                 const SetDescriptor& A) const override;
  std::vector<double> scaled_iterates(KernelPart part, double s, const Point& x,
                                      const SetDescriptor& A,
                                      std::size_t n_max) const override;

  PowerSeries fn_series(std::size_t N) const override;
  PowerSeries Fn_series(std::size_t N) const override;
  PowerSeries fn_series_from(const Measure& mu0, std::size_t N) const override;

  std::optional<double> exact_radius() const override { return r_; }
  std::optional<double> f_at_radius() const override;

  SeriesFunction hs_function(double s, std::size_t N) const override;
  SeriesMeasure pis_measure(double s, std::size_t N) const override;
  double resolvent_m(double s, const Point& x, const SetDescriptor& A,
                     std::size_t n_cap) const override;

  ValidationReport validate(double tol) const override;
  double truncation_error() const override { return truncation_error_; }

  /// f(s) = r c s / (r - s) for s < r.
  double f_closed(double s) const;
  /// m_s(x,[0,t]) = s + a s^2 (e^{(as-1)(t-x)} - 1)/(as - 1) for t >= x.
  double m_resolvent_interval(double s, double x, double t) const;
  /// log of m^n(x,[0,t]) = log(a^n P(N_{t-x} >= n)).
  double log_m_iterate_interval(std::size_t n, double x, double t) const;

  /// The discretized twin on the same grid (independent quadrature route).
  std::shared_ptr<QuadratureKernel> quadrature_twin() const;

private:
  AnalyticKernel(double a, double b, double c, SpacePtr grid_space);
  double coordinate_of(const Point& x) const;
  double a_, b_, c_, r_;
  double truncation_error_ = 0.0;
};

/// log P(Poisson(lambda) >= n), computed through the upper tail series (no
/// cancellation; valid for the full range used by the iterate traces).
double log_poisson_tail(double lambda, std::size_t n);

// --- closed-form reference bundle ---------------------------------------------

/// Reference values for the three-parameter kernel, straight from the
/// closed forms; serves as the oracle for everything the analytic variant
/// computes. Requires a,c > 0, b > -1 and 0 < s < r = (1+b)/a.
struct AnalyticReference {
  double f_s = 0.0;
  double r = 0.0;
  double R = 0.0;
  double m_s_interval = 0.0;    // m_s(x,[0,t])
  double h_s = 0.0;             // f(s) e^{-bx}
  double pi_s_interval = 0.0;   // pi_s([0,t])
  double limit_interval = 0.0;  // lim R^n M^n(x,[0,t])
};

AnalyticReference analytic_reference(double a, double b, double c, double s, double x,
                                     double t);

// --- kernel-level structure checks ---------------------------------------------

/// Strong connectivity of the support graph (finite kernels only).
bool check_irreducible(const AtomKernel& kernel);

struct KernelPeriod {
  std::size_t d = 1;
  std::vector<std::size_t> classes;
};

/// Period and cyclic classes (finite, irreducible kernels only).
KernelPeriod detect_period(const AtomKernel& kernel);

/// validate() with the variant-appropriate default tolerance; throws
/// invalid-atom when the decomposition fails.
ValidationReport validate_atom(const AtomKernel& kernel,
                               std::optional<double> tol = {});

}  // namespace kernelpf

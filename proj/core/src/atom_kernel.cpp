#include "kernelpf/atom_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernelpf/graph.hpp"

namespace kernelpf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(KernelVariant v) {
  switch (v) {
    case KernelVariant::DenseMatrix: return "dense";
    case KernelVariant::DensityQuadrature: return "density";
    case KernelVariant::AnalyticExample: return "analytic";
    case KernelVariant::RankOneRemark: return "rankone";
  }
  return "?";
}

std::size_t AtomKernel::site_of(const Point& p) const {
  if (!p.by_coordinate) {
    if (p.site >= space_->site_count())
      throw PreconditionError("off-grid-point", "site index out of range");
    return p.site;
  }
  if (auto site = space_->site_at(p.x)) return *site;
  throw PreconditionError("off-grid-point",
                          "point " + std::to_string(p.x) +
                              " is not a grid site of this discretized kernel");
}

TypeFunction AtomKernel::apply_m(const TypeFunction& h) const {
  require_same_space(h, *space_, "apply_m");
  return function_from(m_op_.apply(h.values()));
}

TypeFunction AtomKernel::apply_M(const TypeFunction& h) const {
  require_same_space(h, *space_, "apply_M");
  const double gamma_h = gamma_.integrate(h);
  TypeFunction out = apply_m(h);
  auto& v = out.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += g_[i] * gamma_h;
  if (out.exp_form() && g_.exp_form()) {
    ExpSum form = *out.exp_form();
    for (const auto& term : g_.exp_form()->terms)
      form.add(term.amplitude * gamma_h, term.rate);
    out.set_exp_form(std::move(form));
  } else {
    out.clear_exp_form();
  }
  return out;
}

Measure AtomKernel::adjoint_m(const Measure& mu) const {
  require_same_space(mu, *space_, "adjoint_m");
  return Measure::from_masses(space_, m_op_.apply_transposed(mu.masses()));
}

Measure AtomKernel::adjoint_M(const Measure& mu) const {
  require_same_space(mu, *space_, "adjoint_M");
  const double g_mu = mu.integrate(g_);
  Measure out = adjoint_m(mu);
  auto form = out.exp_density();
  auto& masses = out.masses();
  for (std::size_t i = 0; i < masses.size(); ++i)
    masses[i] += g_mu * gamma_.masses()[i];
  if (form) {
    // the atom part of gamma adds no density; keep the closed form only when
    // gamma itself carries no density mass on the nodes
    bool gamma_density_free = true;
    for (std::size_t j = 0; j < space_->node_count(); ++j)
      if (gamma_.masses()[j] != 0.0) gamma_density_free = false;
    if (gamma_density_free)
      out.set_exp_density(*form);
  }
  return out;
}

TypeFunction AtomKernel::set_function(KernelPart part, const SetDescriptor& A) const {
  const TypeFunction profile = function_from(space_->indicator_profile(A));
  return part == KernelPart::StemOnly ? apply_m(profile) : apply_M(profile);
}

double AtomKernel::iterate(KernelPart part, std::size_t n, const Point& x,
                           const SetDescriptor& A) const {
  const std::size_t site = site_of(x);
  TypeFunction v = function_from(space_->indicator_profile(A));
  for (std::size_t k = 0; k < n; ++k)
    v = part == KernelPart::StemOnly ? apply_m(v) : apply_M(v);
  return v[site];
}

std::vector<double> AtomKernel::scaled_iterates(KernelPart part, double s, const Point& x,
                                                const SetDescriptor& A,
                                                std::size_t n_max) const {
  const std::size_t site = site_of(x);
  std::vector<double> out(n_max + 1);
  TypeFunction v = function_from(space_->indicator_profile(A));
  out[0] = v[site];
  for (std::size_t n = 1; n <= n_max; ++n) {
    v = part == KernelPart::StemOnly ? apply_m(v) : apply_M(v);
    for (double& val : v.values()) val *= s;
    out[n] = v[site];
  }
  return out;
}

PowerSeries AtomKernel::fn_series(std::size_t N) const {
  return fn_series_from(gamma_, N);
}

PowerSeries AtomKernel::Fn_series(std::size_t N) const {
  return Fn_series_from(gamma_, N);
}

PowerSeries AtomKernel::fn_series_from(const Measure& mu0, std::size_t N) const {
  require_same_space(mu0, *space_, "fn_series_from");
  std::vector<double> coeffs(N);
  TypeFunction h = g_;
  for (std::size_t n = 1; n <= N; ++n) {
    coeffs[n - 1] = mu0.integrate(h);
    if (n < N) h = apply_m(h);
  }
  return PowerSeries(std::move(coeffs));
}

PowerSeries AtomKernel::Fn_series_from(const Measure& mu0, std::size_t N) const {
  require_same_space(mu0, *space_, "Fn_series_from");
  std::vector<double> coeffs(N);
  TypeFunction h = g_;
  for (std::size_t n = 1; n <= N; ++n) {
    coeffs[n - 1] = mu0.integrate(h);
    if (n < N) h = apply_M(h);
  }
  return PowerSeries(std::move(coeffs));
}

namespace {

/// Tail diagnostics for a sup-norm term sequence: q is the worst of the
/// trailing step ratios, so a ratio still drifting upward widens the bound
/// instead of narrowing it.
struct TermTail {
  std::vector<double> norms;

  void push(double norm) {
    norms.push_back(norm);
    if (norms.size() > 8) norms.erase(norms.begin());
  }

  void finish(double& bound, bool& certified) const {
    double q = 0.0;
    for (std::size_t k = 1; k < norms.size(); ++k)
      if (norms[k - 1] > 0.0) q = std::max(q, norms[k] / norms[k - 1]);
    certified = q < 0.999;
    bound = certified && !norms.empty()
                ? norms.back() * q / (1.0 - q)
                : std::numeric_limits<double>::infinity();
  }
};

}  // namespace

SeriesFunction AtomKernel::hs_function(double s, std::size_t N) const {
  SeriesFunction out;
  std::vector<double> acc(space_->site_count(), 0.0);
  TypeFunction h = g_;
  double p = 1.0;
  TermTail tail;
  for (std::size_t n = 1; n <= N; ++n) {
    p *= s;
    double term_norm = 0.0;
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const double term = p * h[i];
      acc[i] += term;
      term_norm = std::max(term_norm, std::abs(term));
    }
    tail.push(term_norm);
    double acc_norm = 0.0;
    for (double v : acc) acc_norm = std::max(acc_norm, v);
    if (acc_norm > 1e12)
      throw PreconditionError("divergence",
                              "h_s partial sums diverge; s exceeds the stem radius");
    if (n < N) h = apply_m(h);
  }
  tail.finish(out.tail_bound, out.certified);
  out.terms = N;
  out.fn = function_from(std::move(acc));
  return out;
}

SeriesMeasure AtomKernel::pis_measure(double s, std::size_t N) const {
  SeriesMeasure out;
  std::vector<double> acc(space_->site_count(), 0.0);
  Measure mu = gamma_;
  double p = 1.0;
  TermTail tail;
  for (std::size_t n = 1; n <= N; ++n) {
    p *= s;
    double term_norm = 0.0;
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const double term = p * mu.masses()[i];
      acc[i] += term;
      term_norm = std::max(term_norm, std::abs(term));
    }
    tail.push(term_norm);
    double acc_norm = 0.0;
    for (double v : acc) acc_norm = std::max(acc_norm, std::abs(v));
    if (acc_norm > 1e12)
      throw PreconditionError("divergence",
                              "pi_s partial sums diverge; s exceeds the stem radius");
    if (n < N) mu = adjoint_m(mu);
  }
  tail.finish(out.tail_bound, out.certified);
  out.terms = N;
  out.mu = Measure::from_masses(space_, std::move(acc));
  return out;
}

double AtomKernel::resolvent_m(double s, const Point& x, const SetDescriptor& A,
                               std::size_t n_cap) const {
  const std::size_t site = site_of(x);
  TypeFunction v = function_from(space_->indicator_profile(A));
  double acc = 0.0, p = 1.0;
  for (std::size_t n = 1; n <= n_cap; ++n) {
    p *= s;
    const double inc = p * v[site];
    acc += inc;
    if (n > 16 && std::abs(inc) < 1e-15 * std::max(1.0, std::abs(acc))) break;
    v = apply_m(v);
  }
  return acc;
}

ValidationReport AtomKernel::validate(double) const {
  return {};
}

// --- DenseKernel ---------------------------------------------------------------

DenseKernel::DenseKernel(SpacePtr space, Matrix m, std::vector<double> g,
                         std::vector<double> gamma)
    : AtomKernel(KernelVariant::DenseMatrix, space, TypeFunction(space, std::move(g)),
                 Measure::from_masses(space, std::move(gamma))) {
  if (!space_->is_finite())
    throw unsupported_variant("dense kernels need a finite type space");
  if (m.rows() != space_->site_count() || m.cols() != space_->site_count())
    throw dimension_mismatch("stem matrix must be square over the state set");
  m_op_ = std::move(m);
}

std::shared_ptr<DenseKernel> DenseKernel::from_full(SpacePtr space, const Matrix& M,
                                                    std::vector<double> g,
                                                    std::vector<double> gamma,
                                                    double tol) {
  const std::size_t n = space->site_count();
  if (M.rows() != n || M.cols() != n || g.size() != n || gamma.size() != n)
    throw dimension_mismatch("kernel pieces must all live on the state set");
  Matrix m = M;
  ValidationReport report;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) -= g[i] * gamma[j];
      if (m(i, j) < 0.0) {
        if (m(i, j) < -tol)
          throw invalid_atom("M - g (x) gamma has entry " + std::to_string(m(i, j)) +
                             " at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        report.clamped_negative = std::max(report.clamped_negative, -m(i, j));
        m(i, j) = 0.0;
      }
    }
  if (report.clamped_negative > 0.0)
    report.warnings.push_back("negative stem entries within tolerance clamped to zero");
  auto kernel = std::shared_ptr<DenseKernel>(
      new DenseKernel(std::move(space), std::move(m), std::move(g), std::move(gamma)));
  kernel->build_report_ = std::move(report);
  return kernel;
}

std::shared_ptr<DenseKernel> DenseKernel::from_parts(SpacePtr space, Matrix m,
                                                     std::vector<double> g,
                                                     std::vector<double> gamma) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) < 0.0) throw invalid_atom("stem matrix has a negative entry");
  return std::shared_ptr<DenseKernel>(
      new DenseKernel(std::move(space), std::move(m), std::move(g), std::move(gamma)));
}

Matrix DenseKernel::full_matrix() const {
  Matrix M = m_op_;
  M += Matrix::outer(g_.values(), gamma_.masses());
  return M;
}

ValidationReport DenseKernel::validate(double tol) const {
  ValidationReport report = build_report_;
  // M - g (x) gamma = m is exact by construction; re-derive the residual
  Matrix M = full_matrix();
  for (std::size_t i = 0; i < M.rows(); ++i)
    for (std::size_t j = 0; j < M.cols(); ++j) {
      const double res = std::abs(M(i, j) - m_op_(i, j) - g_[i] * gamma_.masses()[j]);
      report.max_residual = std::max(report.max_residual, res);
    }
  if (gamma_.total_mass() <= 0.0) {
    report.valid = false;
    report.warnings.push_back("gamma has no mass");
  }
  if (g_.max_abs() <= 0.0) {
    report.valid = false;
    report.warnings.push_back("g vanishes identically");
  }
  if (report.max_residual > tol) report.valid = false;
  return report;
}

// --- RankOneKernel -------------------------------------------------------------

RankOneKernel::RankOneKernel(SpacePtr space, std::vector<double> g1,
                             std::vector<double> gamma1, std::vector<double> g,
                             std::vector<double> gamma)
    : AtomKernel(KernelVariant::RankOneRemark, space, TypeFunction(space, std::move(g)),
                 Measure::from_masses(space, std::move(gamma))),
      g1_(std::move(g1)), gamma1_(std::move(gamma1)) {
  m_op_ = Matrix::outer(g1_, gamma1_);
  a1_ = dot(g1_, gamma1_);
  a_ = gamma_.integrate(g_);
}

std::shared_ptr<RankOneKernel> RankOneKernel::create(SpacePtr space,
                                                     std::vector<double> g1,
                                                     std::vector<double> gamma1,
                                                     std::vector<double> g,
                                                     std::vector<double> gamma,
                                                     double tol) {
  if (!space->is_finite())
    throw unsupported_variant("the rank-one fixture lives on a finite space");
  auto kernel = std::shared_ptr<RankOneKernel>(new RankOneKernel(
      std::move(space), std::move(g1), std::move(gamma1), std::move(g), std::move(gamma)));
  const double cross1 = dot(kernel->g1_, kernel->gamma_.masses());
  const double cross2 = kernel->gamma_.integrate(kernel->g_) -
                        kernel->a_;  // placeholder, recomputed below
  (void)cross2;
  const double cross_g_gamma1 = dot(kernel->g_.values(), kernel->gamma1_);
  if (std::abs(cross1) > tol || std::abs(cross_g_gamma1) > tol)
    throw invalid_atom("rank-one fixture needs vanishing cross-integrals");
  if (!(kernel->a1_ > kernel->a_ && kernel->a_ > 0.0))
    throw invalid_atom("rank-one fixture needs a1 > a > 0");
  return kernel;
}

Matrix RankOneKernel::full_matrix() const {
  Matrix M = m_op_;
  M += Matrix::outer(g_.values(), gamma_.masses());
  return M;
}

ValidationReport RankOneKernel::validate(double tol) const {
  ValidationReport report;
  const double cross1 = dot(g1_, gamma_.masses());
  const double cross2 = dot(g_.values(), gamma1_);
  report.max_residual = std::max(std::abs(cross1), std::abs(cross2));
  if (report.max_residual > tol || !(a1_ > a_ && a_ > 0.0)) report.valid = false;
  return report;
}

// --- QuadratureKernel ----------------------------------------------------------

QuadratureKernel::QuadratureKernel(SpacePtr space, Matrix m_op, std::vector<double> g,
                                   Measure gamma)
    : AtomKernel(KernelVariant::DensityQuadrature, space,
                 TypeFunction(space, std::move(g)), std::move(gamma)) {
  m_op_ = std::move(m_op);
}

std::shared_ptr<QuadratureKernel> QuadratureKernel::from_sampled_density(
    SpacePtr space, const Matrix& density, std::vector<double> g, Measure gamma) {
  if (!space->is_grid())
    throw unsupported_variant("density kernels need a grid type space");
  const std::size_t sites = space->site_count();
  const std::size_t nodes = space->node_count();
  if (density.rows() != sites || density.cols() != nodes)
    throw dimension_mismatch("density must be sampled at (site, node) pairs");
  require_same_space(gamma, *space, "quadrature kernel");
  Matrix m_op(sites, sites, 0.0);
  for (std::size_t i = 0; i < sites; ++i)
    for (std::size_t j = 0; j < nodes; ++j) {
      if (density(i, j) < 0.0) throw invalid_atom("stem density has a negative sample");
      m_op(i, j) = space->weights()[j] * density(i, j);
    }
  auto kernel = std::shared_ptr<QuadratureKernel>(new QuadratureKernel(
      std::move(space), std::move(m_op), std::move(g), std::move(gamma)));
  kernel->density_ = density;
  return kernel;
}

std::shared_ptr<QuadratureKernel> QuadratureKernel::from_triangular_density(
    SpacePtr space, const std::function<double(double, double)>& density,
    const std::function<double(double)>& gfn, Measure gamma) {
  if (!space->is_grid())
    throw unsupported_variant("density kernels need a grid type space");
  const std::size_t sites = space->site_count();
  const std::size_t nodes = space->node_count();
  const auto& ys = space->nodes();
  Matrix m_op(sites, sites, 0.0);
  Matrix dens(sites, nodes, 0.0);
  for (std::size_t i = 0; i < sites; ++i) {
    const double x = space->coordinate(i);
    // first node inside the support {y >= x}
    std::size_t j0 = 0;
    while (j0 < nodes && ys[j0] < x - 1e-12) ++j0;
    for (std::size_t j = j0; j < nodes; ++j) {
      const double left = j == j0 ? 0.0 : (ys[j] - ys[j - 1]) / 2.0;
      const double right = j + 1 == nodes ? 0.0 : (ys[j + 1] - ys[j]) / 2.0;
      dens(i, j) = density(x, ys[j]);
      m_op(i, j) = (left + right) * dens(i, j);
    }
  }
  std::vector<double> g(sites);
  for (std::size_t i = 0; i < sites; ++i) g[i] = gfn(space->coordinate(i));
  auto kernel = std::shared_ptr<QuadratureKernel>(new QuadratureKernel(
      std::move(space), std::move(m_op), std::move(g), std::move(gamma)));
  kernel->density_ = std::move(dens);
  return kernel;
}

ValidationReport QuadratureKernel::validate(double tol) const {
  ValidationReport report;
  for (std::size_t i = 0; i < density_.rows(); ++i)
    for (std::size_t j = 0; j < density_.cols(); ++j)
      if (density_(i, j) < 0.0) {
        report.valid = false;
        report.warnings.push_back("negative density sample");
      }
  if (gamma_.total_mass() <= 0.0) {
    report.valid = false;
    report.warnings.push_back("gamma has no mass");
  }
  if (g_.max_abs() <= 0.0) {
    report.valid = false;
    report.warnings.push_back("g vanishes identically");
  }
  (void)tol;  // the discrete decomposition M = m + g (x) gamma is exact here
  return report;
}

// --- AnalyticKernel ------------------------------------------------------------

double log_poisson_tail(double lambda, std::size_t n) {
  if (n == 0) return 0.0;
  if (lambda <= 0.0) return -kInf;
  const double nn = static_cast<double>(n);
  // deep inside the bulk the tail is 1 to far below double precision
  // (Chernoff: P(N < n) <= e^{-(lambda-n)^2/(2 lambda)} for n < lambda)
  if (nn < lambda - 20.0 * std::sqrt(lambda) - 20.0) return 0.0;
  // P(N >= n) = e^{-l} l^n/n! * (1 + l/(n+1) + l^2/((n+1)(n+2)) + ...)
  double series = 1.0, term = 1.0;
  for (std::size_t j = 1; j < 1000000; ++j) {
    term *= lambda / static_cast<double>(n + j);
    series += term;
    if (term < 1e-18 * series && lambda < static_cast<double>(n + j)) break;
  }
  return -lambda + nn * std::log(lambda) - std::lgamma(nn + 1.0) + std::log(series);
}

namespace {

TypeFunction analytic_g_function(const SpacePtr& space, double b, double c) {
  ExpSum form;
  form.add(c, b);
  return TypeFunction::from_exp_sum(space, std::move(form));
}

Measure delta_at_origin(const SpacePtr& space) {
  // the single designated point mass sits at 0
  return Measure::point_mass(space, space->node_count());
}

}  // namespace

AnalyticKernel::AnalyticKernel(double a, double b, double c, SpacePtr grid_space)
    : AtomKernel(KernelVariant::AnalyticExample, grid_space,
                 analytic_g_function(grid_space, b, c), delta_at_origin(grid_space)),
      a_(a), b_(b), c_(c), r_((1.0 + b) / a) {
  // quadrature fallback for functions without a closed form
  m_op_ = quadrature_twin()->stem_operator();
  truncation_error_ = std::exp(-std::min(1.0, 1.0 + b_) * space_->upper_bound());
}

std::shared_ptr<AnalyticKernel> AnalyticKernel::create(double a, double b, double c,
                                                       SpacePtr grid_space) {
  if (!(a > 0.0) || !(c > 0.0) || !(b > -1.0))
    throw invalid_atom("analytic kernel needs a > 0, c > 0, b > -1");
  if (!grid_space->is_grid() || grid_space->point_mass_count() != 1 ||
      grid_space->point_masses()[0] != 0.0)
    throw unsupported_variant("analytic kernel needs a grid with a point mass at 0");
  return std::shared_ptr<AnalyticKernel>(new AnalyticKernel(a, b, c, std::move(grid_space)));
}

std::shared_ptr<AnalyticKernel> AnalyticKernel::create(double a, double b, double c,
                                                       std::size_t node_count,
                                                       std::optional<double> T) {
  if (!(b > -1.0)) throw invalid_atom("analytic kernel needs b > -1");
  const double decay = std::min(1.0, 1.0 + b);
  const double T_eff = T ? *T : std::ceil(12.0 * std::log(10.0) / decay);
  return create(a, b, c, TypeSpace::uniform_grid(T_eff, node_count, {0.0}));
}

std::shared_ptr<QuadratureKernel> AnalyticKernel::quadrature_twin() const {
  const double a = a_;
  return QuadratureKernel::from_triangular_density(
      space_,
      [a](double x, double y) { return y >= x ? a * std::exp(x - y) : 0.0; },
      [this](double x) { return c_ * std::exp(-b_ * x); }, delta_at_origin(space_));
}

double AnalyticKernel::coordinate_of(const Point& x) const {
  if (x.by_coordinate) {
    if (x.x < 0.0) throw PreconditionError("off-grid-point", "types live on [0,inf)");
    return x.x;
  }
  return space_->coordinate(x.site);
}

double AnalyticKernel::f_closed(double s) const {
  if (s >= r_) return kInf;
  return r_ * c_ * s / (r_ - s);
}

double AnalyticKernel::m_resolvent_interval(double s, double x, double t) const {
  if (t < x) return 0.0;
  const double u = a_ * s - 1.0;
  if (std::abs(u) < 1e-9) return s + a_ * s * s * (t - x);
  return s + a_ * s * s * std::expm1(u * (t - x)) / u;
}

double AnalyticKernel::log_m_iterate_interval(std::size_t n, double x, double t) const {
  if (n == 0) return x <= t ? 0.0 : -kInf;
  if (t < x) return -kInf;
  return static_cast<double>(n) * std::log(a_) + log_poisson_tail(t - x, n);
}

TypeFunction AnalyticKernel::apply_m(const TypeFunction& h) const {
  require_same_space(h, *space_, "apply_m");
  if (h.exp_form()) {
    // the stem kernel maps e^{-beta x} to (a/(1+beta)) e^{-beta x}
    ExpSum out;
    for (const auto& term : h.exp_form()->terms) {
      if (term.rate <= -1.0 + 1e-12)
        throw PreconditionError("divergence",
                                "stem integral diverges for exponential rate <= -1");
      out.add(a_ * term.amplitude / (1.0 + term.rate), term.rate);
    }
    return TypeFunction::from_exp_sum(space_, std::move(out));
  }
  return AtomKernel::apply_m(h);
}

Measure AnalyticKernel::adjoint_m(const Measure& mu) const {
  require_same_space(mu, *space_, "adjoint_m");
  // closed route for measures of the form alpha delta_0 + expsum density
  bool node_mass_free = true;
  for (std::size_t j = 0; j < space_->node_count(); ++j)
    if (mu.masses()[j] != 0.0) node_mass_free = false;
  const bool closed = mu.exp_density() || (node_mass_free && mu.atom_mass(0) != 0.0) ||
                      (node_mass_free && mu.total_mass() == 0.0);
  if (closed) {
    ExpSum out;
    const double alpha = mu.atom_mass(0);
    if (alpha != 0.0) out.add(alpha * a_, 1.0);  // delta_0 m = a e^{-y} dy
    if (mu.exp_density()) {
      for (const auto& term : mu.exp_density()->terms) {
        // rho e^{-sigma x} dx  ->  rho a (e^{-sigma y} - e^{-y})/(1 - sigma) dy
        if (std::abs(1.0 - term.rate) < 1e-12)
          return AtomKernel::adjoint_m(mu);  // resonant rate; fall back
        const double coef = term.amplitude * a_ / (1.0 - term.rate);
        out.add(coef, term.rate);
        out.add(-coef, 1.0);
      }
    }
    std::vector<double> density(space_->node_count());
    for (std::size_t j = 0; j < space_->node_count(); ++j)
      density[j] = out.eval(space_->nodes()[j]);
    Measure result = Measure::from_density(
        space_, std::move(density), std::vector<double>(space_->point_mass_count(), 0.0));
    result.set_exp_density(std::move(out));
    return result;
  }
  return AtomKernel::adjoint_m(mu);
}

TypeFunction AnalyticKernel::set_function(KernelPart part, const SetDescriptor& A) const {
  const double gamma_A = gamma_.measure_of(A);
  auto m_of = [&](double x) -> double {
    switch (A.kind) {
      case SetDescriptor::Kind::All:
        return a_;
      case SetDescriptor::Kind::Interval:
        return A.t >= x ? a_ * -std::expm1(x - A.t) : 0.0;
      case SetDescriptor::Kind::Sites:
        return 0.0;  // the stem kernel has a density; points carry no mass
    }
    return 0.0;
  };
  auto fn = TypeFunction::sample(space_, [&](double x) {
    double v = m_of(x);
    if (part == KernelPart::Full) v += c_ * std::exp(-b_ * x) * gamma_A;
    return v;
  });
  return fn;
}

double AnalyticKernel::iterate(KernelPart part, std::size_t n, const Point& x,
                               const SetDescriptor& A) const {
  const auto trace = scaled_iterates(part, 1.0, x, A, n);
  return trace[n];
}

std::vector<double> AnalyticKernel::scaled_iterates(KernelPart part, double s,
                                                    const Point& x, const SetDescriptor& A,
                                                    std::size_t n_max) const {
  const double xc = coordinate_of(x);
  const double logs_a = std::log(s * a_);

  // delta_z(A): the atom at the origin decides membership for point sets
  auto delta_in = [&](double z) -> double {
    switch (A.kind) {
      case SetDescriptor::Kind::All:
        return 1.0;
      case SetDescriptor::Kind::Interval:
        return z <= A.t ? 1.0 : 0.0;
      case SetDescriptor::Kind::Sites:
        return z == 0.0 ? gamma_.measure_of(A) : 0.0;
    }
    return 0.0;
  };
  // s^n m^n(z,A) for n >= 1, in log space to survive growth and underflow
  auto scaled_m = [&](std::size_t n, double z) -> double {
    switch (A.kind) {
      case SetDescriptor::Kind::All:
        return std::exp(static_cast<double>(n) * logs_a);
      case SetDescriptor::Kind::Interval:
        if (A.t < z) return 0.0;
        return std::exp(static_cast<double>(n) * std::log(s) +
                        log_m_iterate_interval(n, z, A.t));
      case SetDescriptor::Kind::Sites:
        return 0.0;  // the stem kernel has a density
    }
    return 0.0;
  };

  std::vector<double> out(n_max + 1);
  out[0] = delta_in(xc);
  if (part == KernelPart::StemOnly) {
    for (std::size_t n = 1; n <= n_max; ++n) out[n] = scaled_m(n, xc);
    return out;
  }

  // regeneration recursion for the full kernel:
  //   s^n M^n(0,A) = s^n m^n(0,A) + sum_{i=1}^n (f_i s^i) s^{n-i} M^{n-i}(0,A),
  // and M^n(x,A) carries the e^{-bx} profile on the regeneration part.
  std::vector<double> fs(n_max + 1, 0.0);
  for (std::size_t i = 1; i <= n_max; ++i)
    fs[i] = c_ * r_ * std::pow(s / r_, static_cast<double>(i));
  std::vector<double> u(n_max + 1, 0.0);
  u[0] = delta_in(0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    double acc = scaled_m(n, 0.0);
    for (std::size_t i = 1; i <= n; ++i) acc += fs[i] * u[n - i];
    u[n] = acc;
  }
  const double shape = std::exp(-b_ * xc);
  for (std::size_t n = 1; n <= n_max; ++n) {
    double acc = scaled_m(n, xc);
    for (std::size_t i = 1; i <= n; ++i) acc += fs[i] * shape * u[n - i];
    out[n] = acc;
  }
  return out;
}

PowerSeries AnalyticKernel::fn_series(std::size_t N) const {
  // the exponential profile e^{-bx} is an exact eigenfunction of the stem
  // kernel with eigenvalue 1/r, so f_n = c r^{1-n}
  std::vector<double> coeffs(N);
  for (std::size_t n = 1; n <= N; ++n)
    coeffs[n - 1] = c_ * std::pow(r_, 1.0 - static_cast<double>(n));
  PowerSeries fs(std::move(coeffs));
  fs.set_exact_tail_ratio(1.0 / r_);
  return fs;
}

PowerSeries AnalyticKernel::Fn_series(std::size_t N) const {
  // G_k := int g dM^k(0,.) obeys G_k = f_{k+1} + sum_{i=1}^k f_i G_{k-i},
  // and F_n = G_{n-1} (renewal over the regeneration structure); the
  // 0-indexed slot coeffs[k] holds F_{k+1} = G_k
  const PowerSeries fn = fn_series(N + 1);
  std::vector<double> G(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    double acc = fn.coeff(k + 1);
    for (std::size_t i = 1; i <= k; ++i) acc += fn.coeff(i) * G[k - i];
    G[k] = acc;
  }
  return PowerSeries(std::move(G));
}

PowerSeries AnalyticKernel::fn_series_from(const Measure& mu0, std::size_t N) const {
  // int g(y) m^{n-1}(x,dy) = f_n e^{-bx}, so the immigration coefficients
  // just rescale by int e^{-bx} mu0(dx)
  require_same_space(mu0, *space_, "fn_series_from");
  const double shape_mass = mu0.integrate(
      TypeFunction::sample(space_, [this](double x) { return std::exp(-b_ * x); }));
  PowerSeries fn = fn_series(N);
  std::vector<double> coeffs = fn.coeffs();
  for (double& v : coeffs) v *= shape_mass;
  PowerSeries out{std::move(coeffs)};
  out.set_exact_tail_ratio(1.0 / r_);
  return out;
}

std::optional<double> AnalyticKernel::f_at_radius() const { return kInf; }

SeriesFunction AnalyticKernel::hs_function(double s, std::size_t N) const {
  if (s >= r_)
    throw PreconditionError("divergence", "h_s diverges at and beyond the stem radius");
  SeriesFunction out;
  const double fs = f_closed(s);
  ExpSum form;
  form.add(fs, b_);
  out.fn = TypeFunction::from_exp_sum(space_, std::move(form));
  // exact closed form; the reported tail is the part a truncation at N would miss
  out.tail_bound = c_ * r_ * std::pow(s / r_, static_cast<double>(N)) * (s / r_) /
                   (1.0 - s / r_);
  out.certified = true;
  out.terms = N;
  return out;
}

SeriesMeasure AnalyticKernel::pis_measure(double s, std::size_t N) const {
  if (s >= r_)
    throw PreconditionError("divergence", "pi_s diverges at and beyond the stem radius");
  SeriesMeasure out;
  // pi_s = s delta_0 + a s^2 e^{(as-1)y} dy
  ExpSum density;
  density.add(a_ * s * s, 1.0 - a_ * s);
  std::vector<double> node_density(space_->node_count());
  for (std::size_t j = 0; j < space_->node_count(); ++j)
    node_density[j] = density.eval(space_->nodes()[j]);
  out.mu = Measure::from_density(space_, std::move(node_density), {s});
  out.mu.set_exp_density(std::move(density));
  const double q = s / r_;
  out.tail_bound = std::pow(q, static_cast<double>(N)) * s / (1.0 - q);
  out.certified = true;
  out.terms = N;
  return out;
}

double AnalyticKernel::resolvent_m(double s, const Point& x, const SetDescriptor& A,
                                   std::size_t) const {
  const double xc = coordinate_of(x);
  switch (A.kind) {
    case SetDescriptor::Kind::All:
      if (a_ * s >= 1.0) return kInf;
      return s / (1.0 - a_ * s);
    case SetDescriptor::Kind::Interval:
      return m_resolvent_interval(s, xc, A.t);
    case SetDescriptor::Kind::Sites:
      return xc == 0.0 ? s * gamma_.measure_of(A) : 0.0;
  }
  return 0.0;
}

ValidationReport AnalyticKernel::validate(double) const {
  ValidationReport report;
  report.valid = a_ > 0.0 && c_ > 0.0 && b_ > -1.0;
  report.max_residual = 0.0;  // closed-form decomposition
  if (truncation_error_ > 1e-12)
    report.warnings.push_back("grid truncation error " + std::to_string(truncation_error_) +
                              " exceeds 1e-12; representations on [0,T] are truncated");
  return report;
}

// --- analytic reference bundle --------------------------------------------------

AnalyticReference analytic_reference(double a, double b, double c, double s, double x,
                                     double t) {
  if (!(a > 0.0) || !(c > 0.0) || !(b > -1.0))
    throw invalid_atom("analytic reference needs a > 0, c > 0, b > -1");
  const double r = (1.0 + b) / a;
  if (!(s > 0.0) || s >= r)
    throw PreconditionError("divergent-series", "reference requires 0 < s < r");
  AnalyticReference ref;
  ref.r = r;
  ref.R = r / (1.0 + c * r);
  ref.f_s = r * c * s / (r - s);
  const double u = a * s - 1.0;
  if (t >= x)
    ref.m_s_interval = std::abs(u) < 1e-9 ? s + a * s * s * (t - x)
                                          : s + a * s * s * std::expm1(u * (t - x)) / u;
  ref.h_s = ref.f_s * std::exp(-b * x);
  const double us = a * s - 1.0;
  ref.pi_s_interval = std::abs(us) < 1e-9 ? s + a * s * s * t
                                          : s + a * s * s * std::expm1(us * t) / us;
  // lim R^n M^n(x,[0,t]) = h(x) pi([0,t]) / (R^2 f'(R)), with h = e^{-bx},
  // pi = R delta_0 + a R^2 e^{(aR-1)y} dy and R^2 f'(R) = 1/c
  const double R = ref.R;
  const double uR = a * R - 1.0;
  const double piRt = std::abs(uR) < 1e-9 ? R + a * R * R * t
                                          : R + a * R * R * std::expm1(uR * t) / uR;
  ref.limit_interval = c * std::exp(-b * x) * piRt;
  return ref;
}

// --- structure checks ------------------------------------------------------------

namespace {

Matrix full_finite_matrix(const AtomKernel& kernel) {
  Matrix M = kernel.stem_operator();
  M += Matrix::outer(kernel.g().values(), kernel.gamma().masses());
  return M;
}

}  // namespace

bool check_irreducible(const AtomKernel& kernel) {
  if (!kernel.space().is_finite())
    throw unsupported_variant("irreducibility check supports finite kernels only");
  return strongly_connected(support_graph(full_finite_matrix(kernel)));
}

KernelPeriod detect_period(const AtomKernel& kernel) {
  if (!kernel.space().is_finite())
    throw unsupported_variant("period detection supports finite kernels only");
  const auto result = detect_period_graph(support_graph(full_finite_matrix(kernel)));
  return {result.d, result.classes};
}

ValidationReport validate_atom(const AtomKernel& kernel, std::optional<double> tol) {
  const double t = tol ? *tol : (kernel.uses_quadrature() ? 1e-6 : 1e-10);
  ValidationReport report = kernel.validate(t);
  if (!report.valid) {
    std::string detail = "atom decomposition invalid";
    for (const auto& w : report.warnings) detail += "; " + w;
    throw invalid_atom(detail);
  }
  return report;
}

}  // namespace kernelpf

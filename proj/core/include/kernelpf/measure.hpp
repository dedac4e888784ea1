#pragma once

#include <optional>
#include <vector>

#include "kernelpf/type_space.hpp"

namespace kernelpf {

/// Sum of exponential terms sum_i amp_i * e^{-rate_i * x}. The closed-form
/// kernel variants keep functions and densities inside this family, which
/// lets them integrate exactly instead of by quadrature.
struct ExpSum {
  struct Term {
    double amplitude = 0.0;
    double rate = 0.0;
  };
  std::vector<Term> terms;

  double eval(double x) const;
  /// integral over [0,t]
  double integral(double t) const;
  /// integral over [0,inf) (requires all rates > 0)
  double integral_all() const;
  void add(double amplitude, double rate);
};

/// Non-negative measurable function sampled per site, optionally carrying an
/// exact exponential-sum form.
class TypeFunction {
public:
  TypeFunction() = default;
  TypeFunction(SpacePtr space, std::vector<double> values);

  /// Build from an evaluator (sampled at every site coordinate).
  template <typename F>
  static TypeFunction sample(const SpacePtr& space, F&& f) {
    std::vector<double> values(space->site_count());
    if (space->is_grid()) {
      for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(space->coordinate(i));
    } else {
      for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(static_cast<double>(i));
    }
    return TypeFunction(space, std::move(values));
  }

  static TypeFunction from_exp_sum(const SpacePtr& space, ExpSum form);

  const SpacePtr& space() const { return space_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t site) const { return values_[site]; }

  const std::optional<ExpSum>& exp_form() const { return exp_form_; }
  void set_exp_form(ExpSum form) { exp_form_ = std::move(form); }
  void clear_exp_form() { exp_form_.reset(); }

  /// Value at a point; grid points off the site set need the exp form.
  double value_at(const Point& p) const;

  double min_over(const SetDescriptor& set) const;
  double max_abs() const;

private:
  SpacePtr space_;
  std::vector<double> values_;
  std::optional<ExpSum> exp_form_;
};

/// Sigma-finite measure: a density sampled at grid nodes (interpreted
/// against the grid quadrature weights) plus atom masses at the designated
/// point-mass locations. Finite spaces use atom masses per state only.
///
/// The "mass vector" view assigns one number per site: w_j * density_j at
/// nodes, the atom mass at point masses; integration against a function is
/// then a plain dot product, and the discretized kernels act on mass
/// vectors exactly, which keeps all atom-decomposition identities exact in
/// the discrete system.
class Measure {
public:
  Measure() = default;

  static Measure from_masses(SpacePtr space, std::vector<double> site_masses);
  static Measure from_density(SpacePtr space, std::vector<double> node_density,
                              std::vector<double> atom_masses);
  /// delta_x: unit atom at a site.
  static Measure point_mass(SpacePtr space, std::size_t site);

  const SpacePtr& space() const { return space_; }

  /// One entry per site (see class comment).
  const std::vector<double>& masses() const { return masses_; }
  std::vector<double>& masses() { return masses_; }

  /// Density view at node j (mass divided by quadrature weight).
  double node_density(std::size_t node) const;
  double atom_mass(std::size_t pm_index) const;

  double total_mass() const;
  double integrate(const TypeFunction& h) const;
  /// Measure of a representable set.
  double measure_of(const SetDescriptor& set) const;

  /// Exact density form, when the measure came out of a closed-form kernel:
  /// density(y) = exp_density(y) on [0,T], plus the atom masses.
  const std::optional<ExpSum>& exp_density() const { return exp_density_; }
  void set_exp_density(ExpSum form) { exp_density_ = std::move(form); }

private:
  SpacePtr space_;
  std::vector<double> masses_;
  std::optional<ExpSum> exp_density_;
};

void require_same_space(const TypeFunction& h, const TypeSpace& space, const char* op);
void require_same_space(const Measure& mu, const TypeSpace& space, const char* op);

}  // namespace kernelpf

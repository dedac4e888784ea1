#include "kernelpf/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kernelpf/matrix.hpp"

namespace kernelpf {

double ExpSum::eval(double x) const {
  double acc = 0.0;
  for (const auto& t : terms) acc += t.amplitude * std::exp(-t.rate * x);
  return acc;
}

double ExpSum::integral(double t) const {
  double acc = 0.0;
  for (const auto& term : terms) {
    if (std::abs(term.rate) < 1e-14) {
      acc += term.amplitude * t;
    } else {
      acc += term.amplitude * (-std::expm1(-term.rate * t)) / term.rate;
    }
  }
  return acc;
}

double ExpSum::integral_all() const {
  double acc = 0.0;
  for (const auto& term : terms) {
    if (term.rate <= 0.0) {
      if (term.amplitude != 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    acc += term.amplitude / term.rate;
  }
  return acc;
}

void ExpSum::add(double amplitude, double rate) {
  if (amplitude == 0.0) return;
  for (auto& t : terms) {
    if (std::abs(t.rate - rate) < 1e-14) {
      t.amplitude += amplitude;
      return;
    }
  }
  terms.push_back({amplitude, rate});
}

TypeFunction::TypeFunction(SpacePtr space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (values_.size() != space_->site_count())
    throw dimension_mismatch("function values must cover every site");
}

TypeFunction TypeFunction::from_exp_sum(const SpacePtr& space, ExpSum form) {
  auto fn = TypeFunction::sample(space, [&](double x) { return form.eval(x); });
  fn.set_exp_form(std::move(form));
  return fn;
}

double TypeFunction::value_at(const Point& p) const {
  if (!p.by_coordinate) return values_.at(p.site);
  if (auto site = space_->site_at(p.x)) return values_[*site];
  if (exp_form_) return exp_form_->eval(p.x);
  throw PreconditionError("off-grid-point",
                          "point is not a grid site and the function has no closed form");
}

double TypeFunction::min_over(const SetDescriptor& set) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (set.contains_site(*space_, i)) best = std::min(best, values_[i]);
  return best;
}

double TypeFunction::max_abs() const {
  double best = 0.0;
  for (double v : values_) best = std::max(best, std::abs(v));
  return best;
}

Measure Measure::from_masses(SpacePtr space, std::vector<double> site_masses) {
  if (site_masses.size() != space->site_count())
    throw dimension_mismatch("measure masses must cover every site");
  Measure mu;
  mu.space_ = std::move(space);
  mu.masses_ = std::move(site_masses);
  return mu;
}

Measure Measure::from_density(SpacePtr space, std::vector<double> node_density,
                              std::vector<double> atom_masses) {
  if (space->is_finite()) {
    if (!node_density.empty())
      throw dimension_mismatch("finite spaces have no density part");
    return from_masses(std::move(space), std::move(atom_masses));
  }
  if (node_density.size() != space->node_count() ||
      atom_masses.size() != space->point_mass_count())
    throw dimension_mismatch("density/atom sizes must match the grid");
  std::vector<double> masses(space->site_count(), 0.0);
  for (std::size_t j = 0; j < node_density.size(); ++j)
    masses[j] = node_density[j] * space->weights()[j];
  for (std::size_t k = 0; k < atom_masses.size(); ++k)
    masses[space->node_count() + k] = atom_masses[k];
  return from_masses(std::move(space), std::move(masses));
}

Measure Measure::point_mass(SpacePtr space, std::size_t site) {
  std::vector<double> masses(space->site_count(), 0.0);
  masses.at(site) = 1.0;
  return from_masses(std::move(space), std::move(masses));
}

double Measure::node_density(std::size_t node) const {
  const double w = space_->weights().at(node);
  if (w <= 0.0) return 0.0;
  return masses_[node] / w;
}

double Measure::atom_mass(std::size_t pm_index) const {
  if (space_->is_finite()) return masses_.at(pm_index);
  return masses_.at(space_->node_count() + pm_index);
}

double Measure::total_mass() const {
  double acc = 0.0;
  for (double m : masses_) acc += m;
  return acc;
}

double Measure::integrate(const TypeFunction& h) const {
  require_same_space(h, *space_, "integrate");
  if (exp_density_ && h.exp_form()) {
    // both sides are exact exponential sums on [0,inf): integrate in closed
    // form (the grid is only a view of these objects)
    double acc = 0.0;
    for (const auto& d : exp_density_->terms)
      for (const auto& f : h.exp_form()->terms) {
        const double rate = d.rate + f.rate;
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        acc += d.amplitude * f.amplitude / rate;
      }
    for (std::size_t k = 0; k < space_->point_mass_count(); ++k)
      acc += atom_mass(k) * h[space_->node_count() + k];
    return acc;
  }
  return dot(masses_, h.values());
}

double Measure::measure_of(const SetDescriptor& set) const {
  if (set.kind == SetDescriptor::Kind::Interval && exp_density_) {
    // closed-form density: integrate it exactly, then add atoms in [0,t]
    double acc = exp_density_->integral(std::min(set.t, space_->upper_bound()));
    for (std::size_t k = 0; k < space_->point_mass_count(); ++k)
      if (space_->point_masses()[k] <= set.t) acc += atom_mass(k);
    return acc;
  }
  return dot(masses_, space_->indicator_profile(set));
}

void require_same_space(const TypeFunction& h, const TypeSpace& space, const char* op) {
  if (!h.space() || !h.space()->same_as(space))
    throw dimension_mismatch(std::string(op) + ": function lives on a different type space");
}

void require_same_space(const Measure& mu, const TypeSpace& space, const char* op) {
  if (!mu.space() || !mu.space()->same_as(space))
    throw dimension_mismatch(std::string(op) + ": measure lives on a different type space");
}

}  // namespace kernelpf

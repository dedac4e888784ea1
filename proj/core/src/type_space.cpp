#include "kernelpf/type_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace kernelpf {

std::shared_ptr<const TypeSpace> TypeSpace::finite(std::vector<std::string> labels) {
  if (labels.empty())
    throw PreconditionError("invalid-space", "finite type space needs at least one label");
  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() != labels.size())
    throw PreconditionError("invalid-space", "finite type space labels must be distinct");
  auto space = std::shared_ptr<TypeSpace>(new TypeSpace());
  space->kind_ = Kind::Finite;
  space->labels_ = std::move(labels);
  return space;
}

std::shared_ptr<const TypeSpace> TypeSpace::grid(double upper_bound,
                                                 std::vector<double> nodes,
                                                 std::vector<double> weights,
                                                 std::vector<double> point_masses) {
  if (nodes.size() < 2)
    throw PreconditionError("invalid-space", "grid needs at least two nodes");
  if (weights.size() != nodes.size())
    throw PreconditionError("invalid-space", "grid weights must match node count");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] < 0.0 || nodes[i] > upper_bound)
      throw PreconditionError("invalid-space", "grid nodes must lie in [0,T]");
    if (i > 0 && nodes[i] <= nodes[i - 1])
      throw PreconditionError("invalid-space", "grid nodes must be strictly increasing");
    if (weights[i] < 0.0)
      throw PreconditionError("invalid-space", "grid weights must be non-negative");
  }
  for (double p : point_masses)
    if (p < 0.0 || p > upper_bound)
      throw PreconditionError("invalid-space", "point-mass locations must lie in [0,T]");
  auto space = std::shared_ptr<TypeSpace>(new TypeSpace());
  space->kind_ = Kind::Grid;
  space->upper_bound_ = upper_bound;
  space->nodes_ = std::move(nodes);
  space->weights_ = std::move(weights);
  space->point_masses_ = std::move(point_masses);
  return space;
}

std::shared_ptr<const TypeSpace> TypeSpace::uniform_grid(double upper_bound,
                                                         std::size_t node_count,
                                                         std::vector<double> point_masses) {
  if (node_count < 2)
    throw PreconditionError("invalid-space", "grid needs at least two nodes");
  std::vector<double> nodes(node_count), weights(node_count);
  const double h = upper_bound / static_cast<double>(node_count - 1);
  for (std::size_t i = 0; i < node_count; ++i) {
    nodes[i] = h * static_cast<double>(i);
    weights[i] = (i == 0 || i + 1 == node_count) ? h / 2.0 : h;
  }
  nodes.back() = upper_bound;
  return grid(upper_bound, std::move(nodes), std::move(weights), std::move(point_masses));
}

std::size_t TypeSpace::site_count() const {
  return is_finite() ? labels_.size() : nodes_.size() + point_masses_.size();
}

double TypeSpace::coordinate(std::size_t site) const {
  if (!is_grid())
    throw PreconditionError("invalid-space", "coordinates exist only on grid spaces");
  if (site < nodes_.size()) return nodes_[site];
  return point_masses_[site - nodes_.size()];
}

std::size_t TypeSpace::site_of_label(const std::string& label) const {
  if (!is_finite())
    throw PreconditionError("invalid-space", "labels exist only on finite spaces");
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end())
    throw PreconditionError("unknown-label", "no such state: " + label);
  return static_cast<std::size_t>(it - labels_.begin());
}

std::optional<std::size_t> TypeSpace::site_at(double x) const {
  if (!is_grid()) return std::nullopt;
  for (std::size_t k = 0; k < point_masses_.size(); ++k)
    if (std::abs(point_masses_[k] - x) <= 1e-9) return nodes_.size() + k;
  for (std::size_t j = 0; j < nodes_.size(); ++j)
    if (std::abs(nodes_[j] - x) <= 1e-9) return j;
  return std::nullopt;
}

std::vector<double> TypeSpace::interval_weights(double t) const {
  if (!is_grid())
    throw PreconditionError("invalid-space", "interval weights exist only on grids");
  std::vector<double> w(nodes_.size(), 0.0);
  if (t <= nodes_.front()) return w;
  const double tc = std::min(t, nodes_.back());
  // trapezoid over the nodes below tc
  std::size_t last = 0;
  while (last + 1 < nodes_.size() && nodes_[last + 1] <= tc) ++last;
  for (std::size_t j = 0; j < last; ++j) {
    const double cell = nodes_[j + 1] - nodes_[j];
    w[j] += cell / 2.0;
    w[j + 1] += cell / 2.0;
  }
  // partial final cell (integrand at t taken as the linear interpolant)
  if (last + 1 < nodes_.size() && tc > nodes_[last]) {
    const double cell = nodes_[last + 1] - nodes_[last];
    const double d = tc - nodes_[last];
    const double frac = d / cell;
    // integral of the interpolant over [node_last, t]
    w[last] += d * (1.0 - frac / 2.0);
    w[last + 1] += d * frac / 2.0;
  }
  return w;
}

std::vector<double> TypeSpace::indicator_profile(const SetDescriptor& set) const {
  std::vector<double> profile(site_count(), 0.0);
  switch (set.kind) {
    case SetDescriptor::Kind::All:
      std::fill(profile.begin(), profile.end(), 1.0);
      break;
    case SetDescriptor::Kind::Sites:
      for (std::size_t s : set.sites) profile.at(s) = 1.0;
      break;
    case SetDescriptor::Kind::Interval: {
      if (!is_grid())
        throw PreconditionError("unrepresentable-set", "intervals need a grid space");
      const auto iw = interval_weights(set.t);
      for (std::size_t j = 0; j < nodes_.size(); ++j) {
        if (weights_[j] > 0.0)
          profile[j] = iw[j] / weights_[j];
        else
          profile[j] = nodes_[j] <= set.t ? 1.0 : 0.0;
      }
      for (std::size_t k = 0; k < point_masses_.size(); ++k)
        profile[nodes_.size() + k] = point_masses_[k] <= set.t ? 1.0 : 0.0;
      break;
    }
  }
  return profile;
}

bool SetDescriptor::contains_site(const TypeSpace& space, std::size_t site) const {
  switch (kind) {
    case Kind::All:
      return true;
    case Kind::Sites:
      return std::find(sites.begin(), sites.end(), site) != sites.end();
    case Kind::Interval:
      if (!space.is_grid())
        throw PreconditionError("unrepresentable-set", "intervals need a grid space");
      return space.coordinate(site) <= t;
  }
  return false;
}

std::string SetDescriptor::to_string(const TypeSpace& space) const {
  switch (kind) {
    case Kind::All:
      return "all";
    case Kind::Interval: {
      std::ostringstream os;
      os << "[0," << t << "]";
      return os.str();
    }
    case Kind::Sites: {
      std::ostringstream os;
      for (std::size_t k = 0; k < sites.size(); ++k) {
        if (k) os << ",";
        os << (space.is_finite() ? space.labels()[sites[k]] : std::to_string(sites[k]));
      }
      return os.str();
    }
  }
  return "";
}

}  // namespace kernelpf

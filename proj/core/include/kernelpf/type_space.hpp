#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kernelpf/errors.hpp"

namespace kernelpf {

struct SetDescriptor;

/// Type space of a kernel: either a finite labelled set, or a truncated
/// quadrature grid on [0,T] with node weights plus designated point-mass
/// locations (for measures with atoms, e.g. delta_0).
///
/// Sites are indexed 0..site_count()-1: for Finite spaces the labels, for
/// Grid spaces the nodes followed by the point-mass locations. Functions
/// and measures are stored per site.
class TypeSpace {
public:
  enum class Kind { Finite, Grid };

  static std::shared_ptr<const TypeSpace> finite(std::vector<std::string> labels);

  static std::shared_ptr<const TypeSpace> grid(double upper_bound,
                                               std::vector<double> nodes,
                                               std::vector<double> weights,
                                               std::vector<double> point_masses);

  /// Uniform grid on [0,T] with composite trapezoid weights.
  static std::shared_ptr<const TypeSpace> uniform_grid(double upper_bound,
                                                       std::size_t node_count,
                                                       std::vector<double> point_masses);

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_grid() const { return kind_ == Kind::Grid; }

  std::size_t site_count() const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t point_mass_count() const { return point_masses_.size(); }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& point_masses() const { return point_masses_; }
  double upper_bound() const { return upper_bound_; }

  bool is_point_mass_site(std::size_t site) const {
    return is_grid() && site >= nodes_.size();
  }

  /// Coordinate of a grid site (node position or point-mass location).
  double coordinate(std::size_t site) const;

  /// Site index of a label (finite spaces).
  std::size_t site_of_label(const std::string& label) const;

  /// Grid site whose coordinate equals x (within 1e-9), point masses first.
  std::optional<std::size_t> site_at(double x) const;

  /// Trapezoid weights for integrating a node-sampled density over [0,t].
  /// The final partial cell, when t falls between nodes, is handled by
  /// linear interpolation of the integrand at t.
  std::vector<double> interval_weights(double t) const;

  /// Per-site representation of a set in the discretized system: values in
  /// [0,1] multiplying site masses. Every discrete operation (set masses,
  /// kernel set-values, resolvents) is defined through this one profile, so
  /// the atom-decomposition identities hold exactly in the discrete system.
  std::vector<double> indicator_profile(const SetDescriptor& set) const;

  bool same_as(const TypeSpace& other) const { return this == &other; }

private:
  TypeSpace() = default;

  Kind kind_ = Kind::Finite;
  std::vector<std::string> labels_;
  double upper_bound_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> point_masses_;
};

using SpacePtr = std::shared_ptr<const TypeSpace>;

/// Measurable sets the library can represent: finite label subsets,
/// intervals [0,t], and the whole space. These cover every set used by the
/// closed-form kernels and the reports.
struct SetDescriptor {
  enum class Kind { All, Sites, Interval };

  Kind kind = Kind::All;
  std::vector<std::size_t> sites;  // Kind::Sites (finite spaces)
  double t = 0.0;                  // Kind::Interval, the set [0,t]

  static SetDescriptor all() { return {}; }
  static SetDescriptor of_sites(std::vector<std::size_t> s) {
    SetDescriptor d;
    d.kind = Kind::Sites;
    d.sites = std::move(s);
    return d;
  }
  static SetDescriptor interval(double t) {
    SetDescriptor d;
    d.kind = Kind::Interval;
    d.t = t;
    return d;
  }

  bool contains_site(const TypeSpace& space, std::size_t site) const;
  std::string to_string(const TypeSpace& space) const;
};

/// A point of the type space: a site index for finite spaces, a coordinate
/// for grids (closed-form kernels accept any coordinate, discretized ones
/// require a grid site).
struct Point {
  bool by_coordinate = false;
  std::size_t site = 0;
  double x = 0.0;

  static Point at_site(std::size_t s) { return {false, s, 0.0}; }
  static Point at(double coord) { return {true, 0, coord}; }
};

}  // namespace kernelpf

#pragma once

#include <vector>

#include "psuper/grid.hpp"

namespace psuper {

/// Real-valued function sampled on the nodes of a Grid, row-major.
/// In extended-real mode values may be +inf (never -inf, never NaN),
/// matching supersolutions valued in (-inf, +inf].
struct ScalarField {
  Grid grid;
  std::vector<double> values;
  bool extended = false;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0, bool extended_ = false)
      : grid(g),
        values(static_cast<std::size_t>(g.node_count()), fill),
        extended(extended_) {}

  double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }

  double at(const std::array<int, 3>& mi) const { return values[static_cast<std::size_t>(grid.node_index(mi))]; }
  double& at(const std::array<int, 3>& mi) { return values[static_cast<std::size_t>(grid.node_index(mi))]; }

  /// Enforces the value invariant; throws on NaN, -inf, or +inf outside
  /// extended-real mode.
  void validate() const;

  bool has_infinite() const;
  double max_finite() const;
  double min_value() const;
  double max_value() const;

  /// Multilinear interpolation at a point inside the grid box (clamped to
  /// the box). Requires finite values at the surrounding nodes unless
  /// extended; +inf propagates.
  double interpolate(const Point& x) const;
};

/// Nodewise vector field (one component array per axis), e.g. a discrete
/// gradient.
struct VectorField {
  Grid grid;
  std::array<std::vector<double>, 3> comp;

  VectorField() = default;
  explicit VectorField(const Grid& g) : grid(g) {
    for (int a = 0; a < g.dim; ++a)
      comp[a].assign(static_cast<std::size_t>(g.node_count()), 0.0);
  }

  double magnitude(std::int64_t i) const {
    double s = 0.0;
    for (int a = 0; a < grid.dim; ++a) {
      const double c = comp[a][static_cast<std::size_t>(i)];
      s += c * c;
    }
    return std::sqrt(s);
  }
};

/// Time-indexed sequence of spatial slices over a SpaceTimeGrid.
struct SpaceTimeField {
  SpaceTimeGrid stgrid;
  std::vector<ScalarField> slices;
  bool extended = false;

  SpaceTimeField() = default;
  explicit SpaceTimeField(const SpaceTimeGrid& g, double fill = 0.0,
                          bool extended_ = false)
      : stgrid(g),
        slices(static_cast<std::size_t>(g.slice_count()),
               ScalarField(g.space, fill, extended_)),
        extended(extended_) {}

  ScalarField& slice(int k) { return slices[static_cast<std::size_t>(k)]; }
  const ScalarField& slice(int k) const { return slices[static_cast<std::size_t>(k)]; }

  void validate() const;
  double max_abs() const;
};

}  // namespace psuper

#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "psuper/common.hpp"

namespace psuper {

/// Uniform rectangular grid on a box in R^n, n in {1,2,3}. Fields live on
/// the nodes; quadrature and discrete gradients live on the cells.
struct Grid {
  int dim = 1;
  Point origin{0, 0, 0};
  Point extent{1, 0, 0};
  std::array<int, 3> cells{1, 1, 1};
  Point h{1, 0, 0};  // spacing, extent[a]/cells[a]

  Grid() = default;
  Grid(int dim_, const Point& origin_, const Point& extent_,
       const std::array<int, 3>& cells_);

  static Grid line(double a, double b, int ncells) {
    return Grid(1, {a, 0, 0}, {b - a, 0, 0}, {ncells, 1, 1});
  }
  static Grid square(double a, double b, int ncells) {
    return Grid(2, {a, a, 0}, {b - a, b - a, 0}, {ncells, ncells, 1});
  }
  static Grid cube(double a, double b, int ncells) {
    return Grid(3, {a, a, a}, {b - a, b - a, b - a}, {ncells, ncells, ncells});
  }

  int nodes_along(int axis) const { return cells[axis] + 1; }

  std::int64_t node_count() const {
    std::int64_t n = 1;
    for (int a = 0; a < dim; ++a) n *= nodes_along(a);
    return n;
  }

  std::int64_t cell_count() const {
    std::int64_t n = 1;
    for (int a = 0; a < dim; ++a) n *= cells[a];
    return n;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= h[a];
    return v;
  }

  double max_spacing() const {
    double m = 0.0;
    for (int a = 0; a < dim; ++a) m = std::max(m, h[a]);
    return m;
  }

  // Row-major node indexing, last axis contiguous.
  std::int64_t node_index(const std::array<int, 3>& mi) const {
    std::int64_t idx = mi[0];
    for (int a = 1; a < dim; ++a) idx = idx * nodes_along(a) + mi[a];
    return idx;
  }

  std::array<int, 3> node_multi(std::int64_t idx) const {
    std::array<int, 3> mi{0, 0, 0};
    for (int a = dim - 1; a >= 1; --a) {
      mi[a] = static_cast<int>(idx % nodes_along(a));
      idx /= nodes_along(a);
    }
    mi[0] = static_cast<int>(idx);
    return mi;
  }

  std::int64_t cell_index(const std::array<int, 3>& mi) const {
    std::int64_t idx = mi[0];
    for (int a = 1; a < dim; ++a) idx = idx * cells[a] + mi[a];
    return idx;
  }

  std::array<int, 3> cell_multi(std::int64_t idx) const {
    std::array<int, 3> mi{0, 0, 0};
    for (int a = dim - 1; a >= 1; --a) {
      mi[a] = static_cast<int>(idx % cells[a]);
      idx /= cells[a];
    }
    mi[0] = static_cast<int>(idx);
    return mi;
  }

  Point node_coords(const std::array<int, 3>& mi) const {
    Point x{0, 0, 0};
    for (int a = 0; a < dim; ++a) x[a] = origin[a] + mi[a] * h[a];
    return x;
  }

  Point cell_center(const std::array<int, 3>& mi) const {
    Point x{0, 0, 0};
    for (int a = 0; a < dim; ++a) x[a] = origin[a] + (mi[a] + 0.5) * h[a];
    return x;
  }

  bool is_boundary(const std::array<int, 3>& mi) const {
    for (int a = 0; a < dim; ++a)
      if (mi[a] == 0 || mi[a] == cells[a]) return true;
    return false;
  }

  /// Number of cells adjacent to the node (2^dim at interior nodes).
  int adjacent_cells(const std::array<int, 3>& mi) const {
    int n = 1;
    for (int a = 0; a < dim; ++a)
      n *= (mi[a] == 0 || mi[a] == cells[a]) ? 1 : 2;
    return n;
  }

  /// Lumped quadrature volume of the node (cell_volume at interior nodes).
  double node_volume(const std::array<int, 3>& mi) const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a)
      v *= (mi[a] == 0 || mi[a] == cells[a]) ? 0.5 * h[a] : h[a];
    return v;
  }

  bool same_layout(const Grid& o) const {
    if (dim != o.dim) return false;
    for (int a = 0; a < dim; ++a) {
      if (cells[a] != o.cells[a]) return false;
      if (origin[a] != o.origin[a] || extent[a] != o.extent[a]) return false;
    }
    return true;
  }

  Box bounding_box() const {
    Box b;
    for (int a = 0; a < dim; ++a) {
      b.lo[a] = origin[a];
      b.hi[a] = origin[a] + extent[a];
    }
    return b;
  }

  Grid refined(int factor) const {
    std::array<int, 3> c = cells;
    for (int a = 0; a < dim; ++a) c[a] *= factor;
    return Grid(dim, origin, extent, c);
  }

  template <typename Fn>
  void for_each_node(Fn&& fn) const {
    std::array<int, 3> mi{0, 0, 0};
    std::int64_t idx = 0;
    const int n0 = nodes_along(0);
    const int n1 = dim > 1 ? nodes_along(1) : 1;
    const int n2 = dim > 2 ? nodes_along(2) : 1;
    for (mi[0] = 0; mi[0] < n0; ++mi[0])
      for (mi[1] = 0; mi[1] < n1; ++mi[1])
        for (mi[2] = 0; mi[2] < n2; ++mi[2]) fn(idx++, mi);
  }

  template <typename Fn>
  void for_each_cell(Fn&& fn) const {
    std::array<int, 3> mi{0, 0, 0};
    std::int64_t idx = 0;
    const int c0 = cells[0];
    const int c1 = dim > 1 ? cells[1] : 1;
    const int c2 = dim > 2 ? cells[2] : 1;
    for (mi[0] = 0; mi[0] < c0; ++mi[0])
      for (mi[1] = 0; mi[1] < c1; ++mi[1])
        for (mi[2] = 0; mi[2] < c2; ++mi[2]) fn(idx++, mi);
  }
};

/// Space-time cylinder: a spatial grid crossed with a uniform time axis.
struct SpaceTimeGrid {
  Grid space;
  double t0 = 0.0;
  double t1 = 1.0;
  int time_steps = 1;

  SpaceTimeGrid() = default;
  SpaceTimeGrid(const Grid& space_, double t0_, double t1_, int steps);

  double dt() const { return (t1 - t0) / time_steps; }
  int slice_count() const { return time_steps + 1; }
  double slice_time(int k) const { return t0 + k * dt(); }
};

}  // namespace psuper

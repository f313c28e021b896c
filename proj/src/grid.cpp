#include "psuper/grid.hpp"

namespace psuper {

Grid::Grid(int dim_, const Point& origin_, const Point& extent_,
           const std::array<int, 3>& cells_)
    : dim(dim_), origin(origin_), extent(extent_), cells(cells_) {
  require(dim >= 1 && dim <= 3, "grid: dim must be 1, 2 or 3");
  std::int64_t n = 1;
  for (int a = 0; a < dim; ++a) {
    require(extent[a] > 0.0, "grid: extent must be strictly positive");
    require(cells[a] > 0, "grid: cells_per_axis must be strictly positive");
    h[a] = extent[a] / cells[a];
    n *= cells[a] + 1;
    require(n < (std::int64_t(1) << 40), "grid: node count exceeds addressable range");
  }
  for (int a = dim; a < 3; ++a) {
    extent[a] = 0.0;
    cells[a] = 1;
    h[a] = 0.0;
  }
}

SpaceTimeGrid::SpaceTimeGrid(const Grid& space_, double t0_, double t1_, int steps)
    : space(space_), t0(t0_), t1(t1_), time_steps(steps) {
  require(t1 > t0, "space-time grid: t1 must exceed t0");
  require(steps > 0, "space-time grid: time_steps must be positive");
  require(space.node_count() * (steps + 1) < (std::int64_t(1) << 40),
          "space-time grid: node count exceeds addressable range");
}

}  // namespace psuper

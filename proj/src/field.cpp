#include "psuper/field.hpp"

#include <algorithm>

namespace psuper {

void ScalarField::validate() const {
  require(values.size() == static_cast<std::size_t>(grid.node_count()),
          "field: value count does not match the grid node count");
  for (double v : values) {
    if (std::isnan(v)) throw Error("field: NaN value");
    if (v == -kInf) throw Error("field: -inf value (only +inf sentinels allowed)");
    if (v == kInf && !extended)
      throw Error("field: +inf value outside extended-real mode");
  }
}

bool ScalarField::has_infinite() const {
  return std::any_of(values.begin(), values.end(),
                     [](double v) { return v == kInf; });
}

double ScalarField::max_finite() const {
  double m = -kInf;
  for (double v : values)
    if (v != kInf) m = std::max(m, v);
  return m;
}

double ScalarField::min_value() const {
  double m = kInf;
  for (double v : values) m = std::min(m, v);
  return m;
}

double ScalarField::max_value() const {
  double m = -kInf;
  for (double v : values) m = std::max(m, v);
  return m;
}

double ScalarField::interpolate(const Point& x) const {
  std::array<int, 3> base{0, 0, 0};
  std::array<double, 3> frac{0, 0, 0};
  for (int a = 0; a < grid.dim; ++a) {
    double s = (x[a] - grid.origin[a]) / grid.h[a];
    s = std::clamp(s, 0.0, static_cast<double>(grid.cells[a]));
    int c = std::min(static_cast<int>(s), grid.cells[a] - 1);
    base[a] = c;
    frac[a] = s - c;
  }
  const int corners = 1 << grid.dim;
  double acc = 0.0;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::array<int, 3> mi = base;
    for (int a = 0; a < grid.dim; ++a) {
      if (c & (1 << a)) {
        mi[a] += 1;
        w *= frac[a];
      } else {
        w *= 1.0 - frac[a];
      }
    }
    const double v = at(mi);
    if (v == kInf) {
      if (w > 0.0) return kInf;
      continue;
    }
    acc += w * v;
  }
  return acc;
}

void SpaceTimeField::validate() const {
  require(slices.size() == static_cast<std::size_t>(stgrid.slice_count()),
          "space-time field: slice count must equal time_steps + 1");
  for (const auto& s : slices) {
    require(s.grid.same_layout(stgrid.space),
            "space-time field: all slices must share the spatial grid");
    s.validate();
  }
}

double SpaceTimeField::max_abs() const {
  double m = 0.0;
  for (const auto& s : slices)
    for (double v : s.values)
      if (v != kInf) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace psuper

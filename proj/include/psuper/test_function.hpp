#pragma once

#include <optional>

#include "psuper/grid.hpp"

namespace psuper {

/// Smooth compactly supported test function: a product of per-axis C^2
/// bumps (1 - s^2)^3 on a support box, optionally times a C^2 time bump.
/// Values and first derivatives are analytic and vanish on and outside the
/// support, standing in for eta, phi, zeta in weak forms.
struct TestFunction {
  int dim = 1;
  Point center{0, 0, 0};
  Point halfwidth{1, 0, 0};
  double amplitude = 1.0;
  bool nonnegative = true;  // the bump profile itself is >= 0
  // Optional time bump for space-time pairings.
  bool has_time = false;
  double t_center = 0.0;
  double t_halfwidth = 1.0;

  static double profile(double s) {
    const double w = 1.0 - s * s;
    return w > 0.0 ? w * w * w : 0.0;
  }
  static double profile_deriv(double s) {
    const double w = 1.0 - s * s;
    return w > 0.0 ? -6.0 * s * w * w : 0.0;
  }
  /// integral of (1-s^2)^3 over [-1, 1]
  static constexpr double profile_integral = 32.0 / 35.0;

  /// Spatial part without amplitude.
  double unit_space(const Point& x) const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a)
      v *= profile((x[a] - center[a]) / halfwidth[a]);
    return v;
  }

  double unit_time(double t) const {
    return has_time ? profile((t - t_center) / t_halfwidth) : 1.0;
  }

  double value(const Point& x, double t = 0.0) const {
    return amplitude * unit_space(x) * unit_time(t);
  }

  /// Spatial gradient (amplitude included).
  Point space_gradient(const Point& x, double t = 0.0) const {
    Point g{0, 0, 0};
    std::array<double, 3> f{1, 1, 1};
    for (int a = 0; a < dim; ++a)
      f[a] = profile((x[a] - center[a]) / halfwidth[a]);
    const double tb = unit_time(t);
    for (int a = 0; a < dim; ++a) {
      double d = profile_deriv((x[a] - center[a]) / halfwidth[a]) / halfwidth[a];
      for (int b = 0; b < dim; ++b)
        if (b != a) d *= f[b];
      g[a] = amplitude * d * tb;
    }
    return g;
  }

  double time_derivative(const Point& x, double t) const {
    if (!has_time) return 0.0;
    return amplitude * unit_space(x) *
           profile_deriv((t - t_center) / t_halfwidth) / t_halfwidth;
  }

  Box support() const {
    Box b;
    for (int a = 0; a < dim; ++a) {
      b.lo[a] = center[a] - halfwidth[a];
      b.hi[a] = center[a] + halfwidth[a];
    }
    return b;
  }

  /// Whether the support box (including time, if present) lies strictly
  /// inside the given cylinder.
  bool strictly_inside(const Grid& g) const;
  bool strictly_inside(const SpaceTimeGrid& g) const;

  /// Exact integral of the bump over its support (product rule).
  double exact_integral() const {
    double v = amplitude;
    for (int a = 0; a < dim; ++a) v *= profile_integral * halfwidth[a];
    if (has_time) v *= profile_integral * t_halfwidth;
    return v;
  }
};

}  // namespace psuper

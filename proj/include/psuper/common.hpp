#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace psuper {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown on precondition / contract violations. Solver non-convergence is
/// not an error: it is reported through the owning report type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

using Point = std::array<double, 3>;

/// Axis-aligned box used for quadrature regions and bump supports.
struct Box {
  Point lo{0, 0, 0};
  Point hi{0, 0, 0};

  bool contains(const Point& x, int dim) const {
    for (int a = 0; a < dim; ++a)
      if (x[a] < lo[a] || x[a] > hi[a]) return false;
    return true;
  }
};

/// |g|^{p-2} with the continuous extension 0 at g = 0 for p > 2 (and 1 for
/// p = 2, where the equation is linear).
inline double degenerate_weight(double grad_sq, double p) {
  if (p == 2.0) return 1.0;
  if (grad_sq <= 0.0) return 0.0;
  return std::pow(grad_sq, 0.5 * (p - 2.0));
}

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace psuper

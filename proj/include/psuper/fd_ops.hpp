#pragma once

#include "psuper/field.hpp"
#include "psuper/test_function.hpp"

namespace psuper {

/// Gradient vector of the multilinear interpolant at a cell center:
/// component a is the mean of the 2^{n-1} node differences along axis a.
/// This is the "staggered" gradient all discrete energies and fluxes use;
/// it reproduces affine fields exactly.
struct CellStencil {
  int dim = 1;
  int corners = 2;                       // 2^dim
  std::array<std::int64_t, 8> offset{};  // node-index offset of each corner
  std::array<double, 3> dcoef{};         // 1 / (2^{dim-1} h[a])

  explicit CellStencil(const Grid& g);

  /// Gradient at the cell whose anchor (lowest corner) node index is `base`.
  std::array<double, 3> gradient(const std::vector<double>& f,
                                 std::int64_t base) const {
    std::array<double, 3> grad{0, 0, 0};
    for (int c = 0; c < corners; ++c) {
      const double v = f[static_cast<std::size_t>(base + offset[c])];
      for (int a = 0; a < dim; ++a)
        grad[a] += (c & (1 << a)) ? v : -v;
    }
    for (int a = 0; a < dim; ++a) grad[a] *= dcoef[a];
    return grad;
  }

  double corner_mean(const std::vector<double>& f, std::int64_t base) const {
    double s = 0.0;
    for (int c = 0; c < corners; ++c)
      s += f[static_cast<std::size_t>(base + offset[c])];
    return s / corners;
  }

  /// d(gradient[a]) / d(f at corner c).
  double dgrad(int a, int c) const {
    return ((c & (1 << a)) ? 1.0 : -1.0) * dcoef[a];
  }
};

/// Nodewise discrete gradient: central differences at interior nodes,
/// one-sided second-order stencils on the boundary. Exact on affine fields.
VectorField gradient(const ScalarField& f);

/// Discrete p-Laplacian div(|grad u|^{p-2} grad u) at the nodes, defined as
/// minus the gradient of the discrete p-energy divided by the nodal volume.
/// Cell-centered staggered fluxes; boundary nodes are set to 0 and are not
/// meaningful (exclude them from norms). Requires p >= 2.
ScalarField p_flux_divergence(const ScalarField& f, double p);

/// Accumulates the gradient of the discrete p-energy
///   E(f) = sum_cells (vol/p) |G_cell|^p
/// into `out` (adding). Cells are restricted to those with anchors in
/// [cell_begin, cell_end) of the row-major cell ordering when given.
void accumulate_energy_gradient(const ScalarField& f, double p,
                                std::vector<double>& out);

/// Discrete p-Dirichlet energy (1/p) int |grad f|^p via cell-midpoint
/// quadrature, consistent with p_flux_divergence as its exact gradient.
double p_energy(const ScalarField& f, double p);

/// (sum |f|^q cellvol)^{1/q} by midpoint quadrature: the cell value of
/// |f|^q is the mean over the cell corners, i.e. the midpoint value of the
/// multilinear interpolant of |f|^q. Cells are selected by their centers
/// lying in `region`. +inf samples make the norm +inf.
double lq_norm(const ScalarField& f, double q, const Box& region);
double lq_norm(const VectorField& f, double q, const Box& region);

/// Space-time version; cells are (spatial cell) x (time slab), centers
/// tested against region in space and [t0,t1] in time (region time bounds in
/// lo[?]: pass a 4th pair via the explicit overload below).
double lq_norm(const SpaceTimeField& f, double q, const Box& space_region,
               double time_lo, double time_hi);

/// Raw integral sum |f|^q dV (no root); used by probes and classifiers.
double lq_integral(const ScalarField& f, double q, const Box& region);
double lq_integral(const SpaceTimeField& f, double q, const Box& space_region,
                   double time_lo, double time_hi);

struct WeakFormResult {
  double value = 0.0;      // quadrature of -v phi_t + <|grad v|^{p-2} grad v, grad phi>
  double tol_bound = 0.0;  // reported discretization tolerance estimate
};

/// Weak-form pairing of a sampled space-time field against a smooth test
/// function (supersolutions give value >= -tol_bound). phi must be
/// nonnegative with support strictly inside the cylinder.
WeakFormResult weak_form_residual(const SpaceTimeField& v,
                                  const TestFunction& phi, double p);

/// Pointwise min(f, k); resolves +inf sentinels to k, so the result is
/// always finite-valued.
ScalarField truncate(const ScalarField& f, double k);
SpaceTimeField truncate(const SpaceTimeField& f, double k);

}  // namespace psuper

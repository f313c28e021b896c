#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psuper/fd_ops.hpp"
#include "psuper/field.hpp"

namespace psuper {

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double energy = 0.0;
  double residual = 0.0;  // max-norm of the pointwise energy-gradient defect
  std::vector<double> objective_trace;  // per accepted iteration, nonincreasing
  std::string message;
};

/// p-Dirichlet problem on a (possibly masked) uniform grid: minimize the
/// discrete p-energy over fields matching the fixed values on non-interior
/// nodes. The default mask fixes exactly the boundary ring.
struct DirichletProblem {
  Grid grid;
  double p = 2.0;
  std::vector<double> fixed_values;        // used at non-interior nodes
  std::vector<std::uint8_t> interior;      // 1 = unknown

  DirichletProblem() = default;
  DirichletProblem(const Grid& g, double p_);

  void validate() const;
  /// Convenience: fix the boundary ring to fn(x).
  template <typename Fn>
  void set_boundary(Fn&& fn) {
    grid.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
      if (!interior[static_cast<std::size_t>(i)])
        fixed_values[static_cast<std::size_t>(i)] = fn(grid.node_coords(mi));
    });
  }
};

struct ObstacleProblem {
  DirichletProblem base;
  ScalarField obstacle;  // psi; solution constrained to w >= psi

  void validate() const;
};

struct ObstacleReport {
  SolveReport solve;
  std::vector<std::uint8_t> active;  // nodes where w == psi
  int active_count = 0;
};

struct SolverOptions {
  double tol = 1e-8;   // max-norm of the pointwise energy-gradient defect
  int max_iterations = 100000;
};

/// Discrete p-Dirichlet energy of a field (see p_energy).
double energy(const ScalarField& f, double p);

/// Preconditioned descent with backtracking line search from the all-zeros
/// interior start (deterministic). Non-convergence is reported, never
/// silently returned.
std::pair<ScalarField, SolveReport> solve_dirichlet(const DirichletProblem& prob,
                                                    const SolverOptions& opt = {});

/// Same objective subject to w >= obstacle (projected descent; the
/// projection guarantees feasibility exactly).
std::pair<ScalarField, ObstacleReport> solve_obstacle(const ObstacleProblem& prob,
                                                      const SolverOptions& opt = {});

/// One backward-Euler step of u_t = div(|grad u|^{p-2} grad u), realized as
/// the proximal minimization
///   argmin_w  sum (w-u)^2 vol / (2 dt) + energy(w, p)
/// with the given fixed boundary values. Unconditionally stable in dt.
std::pair<ScalarField, SolveReport> prox_step(const ScalarField& u, double p,
                                              double dt,
                                              const std::vector<double>& boundary_values,
                                              const std::vector<std::uint8_t>& interior,
                                              const SolverOptions& opt = {});

struct EigenResult {
  ScalarField U;       // normalized eigenfunction, >= 0, zero on the boundary
  double J0 = 0.0;     // minimum Rayleigh-type quotient
  double C = 0.0;      // scaling with J0 C^{p-2} = 1/(p-2)
  int iterations = 0;
  double residual = 0.0;  // max-norm defect of  div(|grad U|^{p-2} grad U) + U/(p-2)
  bool converged = false;
  std::string message;
};

/// Quotient J(w) = int |grad w|^p / (int w^2)^{p/2} over nonzero fields
/// vanishing on the boundary ring (evaluated with the discrete cell
/// quadratures; scale invariant).
double rayleigh_quotient(const ScalarField& w, double p);

/// Ground state of the quotient J by projected descent on the unit L^2
/// sphere with absolute-value projection (keeps w >= 0); returns
/// U = C w with C = (1/((p-2) J0))^{1/(p-2)}, so that U solves
/// div(|grad U|^{p-2} grad U) + U/(p-2) = 0 with zero boundary data.
/// p = 2 is permitted here only as a solver sanity mode (C is then
/// meaningless and left at 1).
EigenResult eigenfunction_U(const Grid& grid, double p,
                            const SolverOptions& opt = {},
                            const ScalarField* start = nullptr);

}  // namespace psuper

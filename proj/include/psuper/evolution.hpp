#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "psuper/field.hpp"
#include "psuper/variational.hpp"

namespace psuper {

/// Initial/lateral-boundary data for the evolutionary p-Laplace equation on
/// a space-time cylinder. lateral(x, t) supplies the boundary-ring values
/// at each time slice.
struct EvolutionProblem {
  SpaceTimeGrid stgrid;
  double p = 3.0;
  ScalarField initial;
  std::function<double(const Point&, double)> lateral;

  void validate() const;
};

struct EvolveReport {
  bool converged = false;
  int failed_step = -1;
  std::vector<double> step_energies;       // energy(u^k) after each step
  std::vector<double> dissipation_slack;   // energy(u^k) - energy(u^{k+1}) - ||du||^2 vol/dt
  std::vector<int> step_iterations;
  std::string message;
};

/// Sequential backward-Euler (proximal) stepping over all time steps.
std::pair<SpaceTimeField, EvolveReport> evolve(const EvolutionProblem& prob,
                                               const SolverOptions& opt = {});

struct ComparisonReport {
  double worst_violation = 0.0;  // min over interior space-time of (super - sub)
  std::array<int, 3> worst_node{0, 0, 0};
  int worst_slice = 0;
};

/// Checks the parabolic comparison principle between two fields on the same
/// cylinder. Errors if the parabolic-boundary ordering fails (with the
/// message naming whether the initial slice or the lateral boundary is at
/// fault).
ComparisonReport comparison_check(const SpaceTimeField& sub,
                                  const SpaceTimeField& super, double p);

enum class SupersolutionClass { ClassB, ClassM, Indeterminate };

struct ClassVerdict {
  SupersolutionClass tag = SupersolutionClass::Indeterminate;
  double t0 = 0.0;              // blow-up time (ClassM only)
  double fitted_exponent = 0.0; // decay exponent of the spatial minimum
  double lower_bound_constant = 0.0;
  double worst_slab_slope = 0.0;  // refinement slope of the L^{p-2} slab integrals
  std::string detail;
};

struct ClassifyOptions {
  double divergent_slope = 0.2;
  double flat_slope = 0.1;
  double exponent_rtol = 0.10;  // tolerance on -1/(p-2)
  int slabs = 8;
  double interior_shrink = 0.25;  // fraction cut from each spatial side
};

/// Class dichotomy certificate: L^{p-2} slab integrals are measured on a
/// decimation ladder (strides 4/2/1 of the given sample); a divergent slab
/// plus a spatial-minimum blow-up with rate (t-t0)^{-1/(p-2)} gives ClassM,
/// flat slabs give ClassB, anything between is Indeterminate - never a
/// guess. Requires p > 2 and cells/time_steps divisible by 4.
ClassVerdict classify(const SpaceTimeField& v, double p,
                      const ClassifyOptions& opt = {});

/// Per-node blow-up time from the linear law v^{-(p-2)} ~ (t - t0)/U^{p-2};
/// used to check that blow-up happens on a whole time slice.
std::optional<double> fit_node_blowup_time(const SpaceTimeField& v, double p,
                                           std::int64_t node);

struct DiscreteMeasure {
  SpaceTimeGrid stgrid;
  /// mass per (slice k >= 1, interior node i), linear index k*nodes+i
  std::vector<double> masses;
  double total = 0.0;
  double clamped_negative_total = 0.0;  // |sum| of clamped negative raw masses
  double min_raw_mass = 0.0;

  double mass_at(int k, std::int64_t node) const {
    return masses[static_cast<std::size_t>(k) *
                      static_cast<std::size_t>(stgrid.space.node_count()) +
                  static_cast<std::size_t>(node)];
  }
};

/// Riesz measure of a class-B field: dual assembly of v_t - div(|grad v|^{p-2}
/// grad v) against the nodal partition-of-unity hats, realized as the lumped
/// backward time difference plus the discrete energy gradient, so solver
/// outputs are measure-free to solver tolerance. Small negative masses are
/// clamped to zero and tallied. ClassM input is refused (it induces no
/// sigma-finite measure). Set check_class = false only for p = 2, where the
/// unbounded class is empty.
DiscreteMeasure riesz_measure(const SpaceTimeField& v, double p,
                              double clamp_tol, bool check_class = true);

}  // namespace psuper

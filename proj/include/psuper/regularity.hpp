#pragma once

#include <string>
#include <vector>

#include "psuper/closed_forms.hpp"
#include "psuper/fd_ops.hpp"
#include "psuper/field.hpp"

namespace psuper {

/// Resolution ladder: quadrature cell counts double per level over a fixed
/// region. Resolution is the operational proxy for local integrability;
/// nothing adaptive, the meshes are fixed a priori.
struct RefinementLadder {
  Box region;                      // spatial region (also the domain)
  std::array<int, 3> base_cells{64, 1, 1};
  int dim = 1;
  int levels = 4;
  int factor = 2;
  // Time block, for time-dependent forms.
  bool has_time = false;
  double time_lo = 0.0;
  double time_hi = 1.0;
  int base_time_cells = 64;
  /// Power grading of the time partition, t = lo + (hi-lo) s^gamma: the
  /// uniform-in-s midpoint rule in the self-similar variable. gamma = 1 is
  /// the plain uniform rule.
  double time_grading = 1.0;

  void validate() const;
};

enum class ProbeVerdict { Convergent, Divergent, Indeterminate };

struct ProbeReport {
  double q = 0.0;
  std::vector<double> level_h;
  std::vector<double> level_integrals;  // int |target|^q (integral, not root)
  double slope = 0.0;                   // d log(integral) / d log(1/h)
  ProbeVerdict verdict = ProbeVerdict::Indeterminate;
  double divergent_slope = 0.2;
  double flat_slope = 0.1;
};

enum class ProbeTarget { Function, Gradient };

/// Summability instrument: per ladder level, the midpoint-quadrature
/// integral of |cf|^q (or of its central-difference gradient at the level's
/// spacing), and the fitted log-log slope against resolution. Positive
/// slope = mass still arriving from the singularity = divergence.
ProbeReport summability_probe(const ClosedForm& cf, ProbeTarget target,
                              double q, const RefinementLadder& ladder,
                              double divergent_slope = 0.2,
                              double flat_slope = 0.1);

struct LevelSetReport {
  std::vector<double> heights;
  std::vector<double> measures;  // |E_j|, cells fully inside {j <= v <= 2j}
  double exponent = 0.0;         // slope of log|E_j| vs log j
  double fit_residual = 0.0;
};

/// Measures |E_j| = |{j <= v <= 2j}| by counting closed cells fully inside
/// (inner approximation) and fits the scaling exponent. Needs at least 4
/// usable heights and an unbounded-looking field.
LevelSetReport level_set_scaling(const ScalarField& f,
                                 const std::vector<double>& heights);
LevelSetReport level_set_scaling(const SpaceTimeField& f,
                                 const std::vector<double>& heights);

enum class CaccioppoliVariant { EllipticBounded, EllipticLog, Parabolic };

struct CaccioppoliReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs
  double h = 0.0;
  bool pass = false;   // ratio <= 1 + 10 h
};

/// Energy estimates extracted from the weak form, checked by quadrature:
///  EllipticBounded: int zeta^p |grad v|^p <= p^p (osc v)^p int |grad zeta|^p
///  EllipticLog:     int zeta^p |grad log v|^p <= (p/(p-1))^p int |grad zeta|^p
///  Parabolic:       intint zeta^p |grad v|^p <=
///                     2(2(p-1))^{p-1} L^p intint |grad zeta|^p
///                     + 2 L^2 intint |d(zeta^p)/dt|,   L = sup v on supp zeta
/// (parabolic constants from the test function (L - v) zeta^p and Young's
/// inequality with absorption factor 1/2).
CaccioppoliReport caccioppoli_check(const ScalarField& v, const TestFunction& zeta,
                                    double p, CaccioppoliVariant variant);
CaccioppoliReport caccioppoli_check(const SpaceTimeField& v, const TestFunction& zeta,
                                    double p, CaccioppoliVariant variant);

struct HarnackResult {
  double ratio = 0.0;  // u(x0,t0) / inf_{B(x0,R)} u(., t0 + theta)
  double theta = 0.0;  // intrinsic waiting time Cwait R^p / u(x0,t0)^{p-2}
  double value_at_base = 0.0;
  double inf_after_wait = 0.0;
  int wait_slice = 0;
};

/// Intrinsic Harnack ratio at a point: the waiting time is computed from
/// the solution itself; the constant gamma is measured, never asserted.
/// Errors (naming the violated face) if the cylinder B(x0,4R) x
/// (t0 - 4 theta, t0 + 4 theta) escapes the domain or u is not positive on it.
HarnackResult harnack_ratio(const SpaceTimeField& u, const Point& x0, double t0,
                            double R, double Cwait, double p);

/// Least-squares slope of y against x (shared by the fitting reports).
double fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                 double* residual = nullptr);

}  // namespace psuper

#pragma once

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "psuper/field.hpp"
#include "psuper/test_function.hpp"

namespace psuper {

/// Self-similar source-type solution of the evolutionary p-Laplace equation
/// (slow diffusion, p > 2): compactly supported in x for each t > 0,
/// vanishing for t <= 0. C is the free profile constant; the induced point
/// mass is measured, not prescribed.
struct BarenblattParams {
  double p = 3.0;
  int n = 1;
  double C = 1.0;

  double lambda() const { return n * (p - 2.0) + p; }
  void validate() const;

  double evaluate(const Point& x, double t) const;
  /// Radius of the support of the spatial profile at time t > 0.
  double support_radius(double t) const;
  /// Profile F with B(x,t) = t^{-n/lambda} F(|x| t^{-1/lambda}).
  double profile(double xi) const;
};

/// Radial stationary fundamental solution c|x|^{(p-n)/(p-1)}; -c log|x|
/// when p = n. Decreasing in |x| (and +inf at the origin) when p < n; the
/// monotonicity flips for p > n, where the value at the origin is 0.
struct FundamentalParams {
  double p = 2.0;
  int n = 2;
  double c = 1.0;

  void validate() const;
  double evaluate(const Point& x, double t) const;
};

/// Finite superposition of fundamental solutions sum c_j |x-q_j|^{(p-n)/(p-1)},
/// 2 < p < n; +inf exactly at the centers.
struct CrandallZhangParams {
  double p = 2.5;
  int n = 3;
  std::vector<Point> centers;
  std::vector<double> coeffs;

  void validate() const;
  double evaluate(const Point& x, double t) const;
};

/// Separable supersolution U(x) (t - t0)^{-1/(p-2)} for t > t0, 0 for
/// t <= t0. U is a grid-sampled profile (the variational eigenfunction),
/// extended by 0 outside its grid and interpolated multilinearly between
/// nodes.
struct SeparableParams {
  std::shared_ptr<const ScalarField> U;
  double t0 = 0.0;
  double p = 3.0;

  void validate() const;
  double evaluate(const Point& x, double t) const;
};

/// v(x,t) = scale * (t - t_ref): a monotone-in-time supersolution used in
/// weak-form checks.
struct MonotoneTimeParams {
  double scale = 1.0;
  double t_ref = 0.0;

  double evaluate(const Point&, double t) const { return scale * (t - t_ref); }
};

/// Symbolic descriptor of an exact solution, evaluable at any point.
/// Evaluation is pure; +inf is the only admissible infinity.
struct ClosedForm {
  using Variant =
      std::variant<BarenblattParams, FundamentalParams, CrandallZhangParams,
                   SeparableParams, MonotoneTimeParams, TestFunction>;
  Variant form;

  ClosedForm() : form(FundamentalParams{}) {}
  ClosedForm(Variant v) : form(std::move(v)) {}

  double evaluate(const Point& x, double t = 0.0) const;
  bool time_dependent() const;
  const char* variant_name() const;
};

struct SampleOptions {
  std::optional<double> cap;  // truncate at this height (produces v_k)
  bool extended = false;      // allow +inf samples
  double at_time = 0.0;       // evaluation time for spatial samples
};

/// Nodewise evaluation onto a grid. +inf without extended mode or a cap is
/// an error.
ScalarField sample(const ClosedForm& cf, const Grid& grid,
                   const SampleOptions& opt = {});
SpaceTimeField sample(const ClosedForm& cf, const SpaceTimeGrid& grid,
                      const SampleOptions& opt = {});

}  // namespace psuper

#include "psuper/closed_forms.hpp"

#include <cmath>

namespace psuper {

namespace {

double radius(const Point& x, int n) {
  double s = 0.0;
  for (int a = 0; a < n; ++a) s += x[a] * x[a];
  return std::sqrt(s);
}

}  // namespace

void BarenblattParams::validate() const {
  require(p > 2.0, "barenblatt: p must exceed 2");
  require(n >= 1 && n <= 3, "barenblatt: n must be 1, 2 or 3");
  require(C > 0.0, "barenblatt: C must be positive");
}

double BarenblattParams::profile(double xi) const {
  const double lam = lambda();
  const double bracket =
      C - (p - 2.0) / p * std::pow(lam, 1.0 / (1.0 - p)) *
              std::pow(std::abs(xi), p / (p - 1.0));
  return std::pow(positive_part(bracket), (p - 1.0) / (p - 2.0));
}

double BarenblattParams::evaluate(const Point& x, double t) const {
  if (t <= 0.0) return 0.0;
  const double lam = lambda();
  const double xi = radius(x, n) * std::pow(t, -1.0 / lam);
  return std::pow(t, -static_cast<double>(n) / lam) * profile(xi);
}

double BarenblattParams::support_radius(double t) const {
  if (t <= 0.0) return 0.0;
  const double lam = lambda();
  // bracket hits zero at xi = (C p lam^{1/(p-1)} / (p-2))^{(p-1)/p}
  const double xi_max =
      std::pow(C * p / (p - 2.0) * std::pow(lam, 1.0 / (p - 1.0)), (p - 1.0) / p);
  return xi_max * std::pow(t, 1.0 / lam);
}

void FundamentalParams::validate() const {
  require(p >= 2.0, "fundamental: p must be >= 2");
  require(n >= 1 && n <= 3, "fundamental: n must be 1, 2 or 3");
}

double FundamentalParams::evaluate(const Point& x, double) const {
  const double r = radius(x, n);
  if (p == static_cast<double>(n)) {
    if (r == 0.0) return kInf;
    return -c * std::log(r);
  }
  const double expo = (p - n) / (p - 1.0);
  if (r == 0.0) return expo < 0.0 ? kInf : 0.0;
  return c * std::pow(r, expo);
}

void CrandallZhangParams::validate() const {
  require(p > 2.0 && p < static_cast<double>(n),
          "crandall-zhang: requires 2 < p < n");
  require(!centers.empty(), "crandall-zhang: needs at least one center");
  require(centers.size() == coeffs.size(),
          "crandall-zhang: centers and coeffs must pair up");
  for (double c : coeffs)
    require(c > 0.0, "crandall-zhang: coefficients must be positive");
}

double CrandallZhangParams::evaluate(const Point& x, double) const {
  const double expo = (p - n) / (p - 1.0);  // negative here
  double s = 0.0;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    Point d{0, 0, 0};
    for (int a = 0; a < n; ++a) d[a] = x[a] - centers[j][a];
    const double r = radius(d, n);
    if (r == 0.0) return kInf;
    s += coeffs[j] * std::pow(r, expo);
  }
  return s;
}

void SeparableParams::validate() const {
  require(p > 2.0, "separable: p must exceed 2");
  require(U != nullptr, "separable: eigenfunction profile missing");
  for (double v : U->values)
    require(v >= 0.0 && v != kInf, "separable: U must be finite and nonnegative");
}

double SeparableParams::evaluate(const Point& x, double t) const {
  if (t <= t0) return 0.0;
  const Box box = U->grid.bounding_box();
  if (!box.contains(x, U->grid.dim)) return 0.0;  // extended by zero
  const double u = U->interpolate(x);
  return u * std::pow(t - t0, -1.0 / (p - 2.0));
}

double ClosedForm::evaluate(const Point& x, double t) const {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, TestFunction>)
          return f.value(x, f.has_time ? t : 0.0);
        else
          return f.evaluate(x, t);
      },
      form);
}

bool ClosedForm::time_dependent() const {
  return std::visit(
      [](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, BarenblattParams> ||
                      std::is_same_v<T, SeparableParams> ||
                      std::is_same_v<T, MonotoneTimeParams>)
          return true;
        else if constexpr (std::is_same_v<T, TestFunction>)
          return f.has_time;
        else
          return false;
      },
      form);
}

const char* ClosedForm::variant_name() const {
  return std::visit(
      [](const auto& f) -> const char* {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, BarenblattParams>) return "barenblatt";
        else if constexpr (std::is_same_v<T, FundamentalParams>) return "fundamental";
        else if constexpr (std::is_same_v<T, CrandallZhangParams>) return "crandall-zhang";
        else if constexpr (std::is_same_v<T, SeparableParams>) return "separable";
        else if constexpr (std::is_same_v<T, MonotoneTimeParams>) return "monotone-time";
        else return "bump";
      },
      form);
}

namespace {

double sampled_value(const ClosedForm& cf, const Point& x, double t,
                     const SampleOptions& opt) {
  double v = cf.evaluate(x, t);
  if (opt.cap) v = std::min(v, *opt.cap);
  if (v == kInf && !opt.extended)
    throw Error("sample: +inf encountered; pass a cap or enable extended-real mode");
  return v;
}

}  // namespace

ScalarField sample(const ClosedForm& cf, const Grid& grid, const SampleOptions& opt) {
  ScalarField out(grid, 0.0, opt.extended);
  grid.for_each_node([&](std::int64_t idx, const std::array<int, 3>& mi) {
    out[idx] = sampled_value(cf, grid.node_coords(mi), opt.at_time, opt);
  });
  return out;
}

SpaceTimeField sample(const ClosedForm& cf, const SpaceTimeGrid& grid,
                      const SampleOptions& opt) {
  SpaceTimeField out(grid, 0.0, opt.extended);
  for (int k = 0; k < grid.slice_count(); ++k) {
    const double t = grid.slice_time(k);
    grid.space.for_each_node([&](std::int64_t idx, const std::array<int, 3>& mi) {
      out.slice(k)[idx] = sampled_value(cf, grid.space.node_coords(mi), t, opt);
    });
  }
  return out;
}

}  // namespace psuper

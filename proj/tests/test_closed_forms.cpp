#include <cmath>

#include "doctest.h"
#include "psuper/closed_forms.hpp"
#include "psuper/fd_ops.hpp"

using namespace psuper;

TEST_CASE("barenblatt vanishes for t <= 0 and matches the hand value at the center") {
  const BarenblattParams bp{3.0, 1, 1.7};
  CHECK(bp.evaluate({0.3, 0, 0}, -1.0) == 0.0);
  CHECK(bp.evaluate({0.0, 0, 0}, 0.0) == 0.0);
  // x = 0, t = 1, n = 1, p = 3 (lambda = 4): value C^{(p-1)/(p-2)} = C^2.
  CHECK(bp.evaluate({0.0, 0, 0}, 1.0) == doctest::Approx(1.7 * 1.7).epsilon(1e-14));
  // Beyond the interface radius the positive part truncates to zero.
  const double r = bp.support_radius(1.0);
  CHECK(bp.evaluate({r * 1.01, 0, 0}, 1.0) == 0.0);
  CHECK(bp.evaluate({r * 0.99, 0, 0}, 1.0) > 0.0);
}

TEST_CASE("barenblatt support radius grows like t^{1/lambda}") {
  const BarenblattParams bp{3.0, 1, 1.0};
  const double lam = bp.lambda();
  CHECK(lam == doctest::Approx(4.0));
  const double r1 = bp.support_radius(1.0);
  const double r2 = bp.support_radius(std::pow(2.0, lam));
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-12));

  // Interface location read off a sampled slice agrees within one cell.
  const Grid g = Grid::line(0.0, 8.0, 512);
  auto interface_at = [&](double t) {
    double last = 0.0;
    g.for_each_node([&](std::int64_t, const std::array<int, 3>& mi) {
      const Point x = g.node_coords(mi);
      if (bp.evaluate(x, t) > 0.0) last = x[0];
    });
    return last;
  };
  CHECK(std::abs(interface_at(16.0) - 2.0 * interface_at(1.0)) <= 2.0 * g.h[0] + 1e-12);
}

TEST_CASE("barenblatt mass is conserved in time (quadrature check)") {
  const BarenblattParams bp{3.0, 1, 1.0};
  auto mass_at = [&](double t, int n) {
    const Grid g = Grid::line(-6.0, 6.0, n);
    ScalarField f(g);
    g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
      f[i] = bp.evaluate(g.node_coords(mi), t);
    });
    return lq_norm(f, 1.0, g.bounding_box());
  };
  const double m1 = mass_at(1.0, 4096);
  const double m2 = mass_at(2.0, 4096);
  CHECK(m1 == doctest::Approx(m2).epsilon(2e-4));
  // Analytic cross-check of the profile mass: 2 int_0^ximax (C - xi^{3/2}/6)^2 dxi.
  CHECK(m1 == doctest::Approx(2.9705).epsilon(2e-3));
}

TEST_CASE("barenblatt scaling identity holds pointwise") {
  const BarenblattParams bp{3.5, 2, 0.8};
  const double lam = bp.lambda();
  const double s = 3.7;
  for (double t : {0.4, 1.0, 2.5}) {
    for (double r : {0.0, 0.2, 0.8, 1.5}) {
      const Point x{r, 0.1, 0};
      Point xs = x;
      for (auto& c : xs) c *= std::pow(s, 1.0 / lam);
      const double lhs = bp.evaluate(x, t);
      const double rhs =
          std::pow(s, bp.n / lam) * bp.evaluate(xs, s * t);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("fundamental solution special values and limits") {
  // p = n = 2: -log|x| vanishes at |x| = 1 and blows up at the origin.
  const FundamentalParams log2d{2.0, 2, 1.0};
  CHECK(log2d.evaluate({1.0, 0, 0}, 0.0) == 0.0);
  CHECK(log2d.evaluate({0.0, 0, 0}, 0.0) == kInf);

  // p = 3, n = 2: |x|^{1/2} is 1 at |x| = 1 and tends to 0 at the origin.
  const FundamentalParams root{3.0, 2, 1.0};
  CHECK(root.evaluate({1.0, 0, 0}, 0.0) == doctest::Approx(1.0));
  CHECK(root.evaluate({1e-30, 0, 0}, 0.0) < 1e-14);
  CHECK(root.evaluate({0.0, 0, 0}, 0.0) == 0.0);

  // p = 2.5 < n = 3: negative exponent, +inf at the origin, decreasing.
  const FundamentalParams sing{2.5, 3, 1.0};
  CHECK(sing.evaluate({0.0, 0, 0}, 0.0) == kInf);
  CHECK(sing.evaluate({1e-12, 0, 0}, 0.0) > 1e3);
  CHECK(sing.evaluate({0.1, 0, 0}, 0.0) > sing.evaluate({0.2, 0, 0}, 0.0));
}

TEST_CASE("crandall-zhang sums fundamental terms") {
  CrandallZhangParams cz;
  cz.p = 2.5;
  cz.n = 3;
  cz.centers = {{0, 0, 0}};
  cz.coeffs = {1.0};
  cz.validate();
  const FundamentalParams fund{2.5, 3, 1.0};
  for (double r : {0.1, 0.37, 1.2})
    CHECK(cz.evaluate({r, 0, 0}, 0.0) ==
          doctest::Approx(fund.evaluate({r, 0, 0}, 0.0)).epsilon(1e-14));
  CHECK(cz.evaluate({0, 0, 0}, 0.0) == kInf);

  CrandallZhangParams two;
  two.p = 2.5;
  two.n = 3;
  two.centers = {{0, 0, 0}, {1, 0, 0}};
  two.coeffs = {1.0, 1.0};
  // Midpoint value: both terms are 0.5^{-1/3} = 2^{1/3}.
  CHECK(two.evaluate({0.5, 0, 0}, 0.0) ==
        doctest::Approx(2.0 * std::pow(2.0, 1.0 / 3.0)).epsilon(1e-14));

  CrandallZhangParams bad = two;
  bad.p = 3.5;  // outside (2, n)
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("separable solution: zero past, boundary zeros, exact ratio law") {
  const Grid g = Grid::line(0.0, 1.0, 64);
  auto U = std::make_shared<ScalarField>(g);
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    (*U)[i] = std::sin(3.14159265358979323846 * g.node_coords(mi)[0]);
  });
  U->values.front() = 0.0;
  U->values.back() = 0.0;
  SeparableParams sep{U, 0.5, 3.0};
  sep.validate();
  CHECK(sep.evaluate({0.5, 0, 0}, -0.5) == 0.0);
  CHECK(sep.evaluate({0.5, 0, 0}, 0.5) == 0.0);
  CHECK(sep.evaluate({0.0, 0, 0}, 2.0) == 0.0);
  CHECK(sep.evaluate({5.0, 0, 0}, 2.0) == 0.0);  // extended by zero outside
  const double a = sep.evaluate({0.3, 0, 0}, 0.5 + 2.0);
  const double b = sep.evaluate({0.3, 0, 0}, 0.5 + 1.0);
  CHECK(a / b == doctest::Approx(std::pow(2.0, -1.0 / (3.0 - 2.0))).epsilon(1e-13));
}

TEST_CASE("sampling: zero field on negative times, caps, +inf guard") {
  const BarenblattParams bp{3.0, 1, 1.0};
  const SpaceTimeGrid neg(Grid::line(-1.0, 1.0, 8), -2.0, -1.0, 4);
  const auto zero = sample(ClosedForm{bp}, neg);
  for (const auto& s : zero.slices)
    for (double v : s.values) CHECK(v == 0.0);

  // fundamental p=2, n=2 capped at k equals min(-log|x|, k) nodewise.
  const FundamentalParams log2d{2.0, 2, 1.0};
  const Grid g = Grid::square(-1.0, 1.0, 16);
  SampleOptions capped;
  capped.cap = 1.5;
  const auto f = sample(ClosedForm{log2d}, g, capped);
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    const Point x = g.node_coords(mi);
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    const double expect = r == 0.0 ? 1.5 : std::min(-std::log(r), 1.5);
    CHECK(f[i] == doctest::Approx(expect).epsilon(1e-14));
  });

  CHECK_THROWS_AS(sample(ClosedForm{log2d}, g), Error);  // +inf, no cap
  SampleOptions ext;
  ext.extended = true;
  const auto fe = sample(ClosedForm{log2d}, g, ext);
  CHECK(fe.has_infinite());
}

TEST_CASE("sampled Barenblatt L^1 norm is finite and refinement stable") {
  const BarenblattParams bp{3.0, 1, 1.0};
  double prev = 0.0;
  std::vector<double> vals;
  for (int n : {64, 128, 256}) {
    const SpaceTimeGrid stg(Grid::line(-2.0, 2.0, n), 0.0, 1.0, n);
    const auto v = sample(ClosedForm{bp}, stg);
    Box region;
    region.lo = {-1.0, 0, 0};
    region.hi = {1.0, 0, 0};
    vals.push_back(lq_norm(v, 1.0, region, 0.0, 1.0));
    prev = vals.back();
  }
  CHECK(prev > 0.0);
  CHECK(std::abs(vals[2] - vals[1]) < std::abs(vals[1] - vals[0]));
  CHECK(std::abs(vals[2] - vals[1]) / vals[2] < 0.02);
}

TEST_CASE("evaluators are pure: repeated calls bit-identical") {
  const BarenblattParams bp{3.3, 2, 1.1};
  const Point x{0.37, -0.2, 0};
  CHECK(bp.evaluate(x, 0.9) == bp.evaluate(x, 0.9));
  const FundamentalParams fp{2.5, 3, 2.0};
  CHECK(fp.evaluate(x, 0.0) == fp.evaluate(x, 0.0));
}

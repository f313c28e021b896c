#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles/shooting_oracle.hpp"
#include "psuper/closed_forms.hpp"
#include "psuper/variational.hpp"

using namespace psuper;

namespace {

constexpr double kPi = 3.14159265358979323846;

DirichletProblem line_problem(int cells, double p, double left, double right) {
  DirichletProblem prob(Grid::line(0.0, 1.0, cells), p);
  prob.set_boundary([&](const Point& x) { return x[0] < 0.5 ? left : right; });
  return prob;
}

}  // namespace

TEST_CASE("energy: constants, exact 1-D slope value, evenness") {
  const Grid g = Grid::line(0.0, 1.0, 64);
  CHECK(energy(ScalarField(g, 3.0), 3.0) == 0.0);

  for (double p : {2.0, 3.0, 4.0}) {
    const double s = 1.7;
    ScalarField f(g);
    g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
      f[i] = s * g.node_coords(mi)[0];
    });
    CHECK(energy(f, p) == doctest::Approx(std::pow(s, p) / p).epsilon(1e-13));
    ScalarField fn(g);
    for (std::size_t i = 0; i < f.values.size(); ++i) fn.values[i] = -f.values[i];
    CHECK(energy(f, p) == energy(fn, p));
  }
}

TEST_CASE("solve_dirichlet: 1-D data gives the affine interpolation for any p") {
  for (double p : {2.0, 3.0, 4.5}) {
    const auto prob = line_problem(64, p, 0.0, 1.0);
    const auto [u, rep] = solve_dirichlet(prob);
    REQUIRE(rep.converged);
    prob.grid.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
      CHECK(std::abs(u[i] - prob.grid.node_coords(mi)[0]) < 1e-6);
    });
    // Objective trace is monotone nonincreasing (descent property).
    for (std::size_t k = 1; k < rep.objective_trace.size(); ++k)
      CHECK(rep.objective_trace[k] <= rep.objective_trace[k - 1] + 1e-15);
  }
}

TEST_CASE("solve_dirichlet: constant boundary data gives the constant") {
  DirichletProblem prob(Grid::square(0.0, 1.0, 16), 3.0);
  prob.set_boundary([](const Point&) { return 7.0; });
  const auto [u, rep] = solve_dirichlet(prob);
  REQUIRE(rep.converged);
  // The flat minimizer is fully degenerate (zero Hessian at grad u = 0), so
  // the residual tolerance controls values only to ~ tol^{1/(p-1)} scale.
  for (double v : u.values) CHECK(std::abs(v - 7.0) < 1e-4);
  CHECK(rep.energy < 1e-12);
}

TEST_CASE("solve_dirichlet: annulus with fundamental boundary data matches the closed form") {
  // c r^{(p-n)/(p-1)} is exactly p-harmonic off the origin (p=3, n=2).
  const FundamentalParams fund{3.0, 2, 1.0};
  const int cells = 288;  // h = 1/64 over (-2.25, 2.25)
  const Grid g = Grid::square(-2.25, 2.25, cells);
  DirichletProblem prob(g, 3.0);
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    const Point x = g.node_coords(mi);
    const double r = std::hypot(x[0], x[1]);
    const bool inside = r > 1.0 && r < 2.0 && !g.is_boundary(mi);
    prob.interior[static_cast<std::size_t>(i)] = inside ? 1 : 0;
    if (!inside) prob.fixed_values[static_cast<std::size_t>(i)] = fund.evaluate(x, 0.0);
  });
  SolverOptions opt;
  opt.tol = 1e-7;
  const auto [u, rep] = solve_dirichlet(prob, opt);
  REQUIRE(rep.converged);
  double max_err = 0.0, scale = 0.0;
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    if (!prob.interior[static_cast<std::size_t>(i)]) return;
    const double exact = fund.evaluate(g.node_coords(mi), 0.0);
    max_err = std::max(max_err, std::abs(u[i] - exact));
    scale = std::max(scale, std::abs(exact));
  });
  CHECK(max_err / scale < 0.01);
}

TEST_CASE("discrete comparison: ordered boundary data gives ordered solutions") {
  for (int dim = 1; dim <= 2; ++dim) {
    const Grid g = dim == 1 ? Grid::line(0.0, 1.0, 48) : Grid::square(0.0, 1.0, 24);
    DirichletProblem lo(g, 3.0), hi(g, 3.0);
    lo.set_boundary([](const Point& x) { return std::sin(3.0 * x[0]) + x[1]; });
    hi.set_boundary([](const Point& x) { return std::sin(3.0 * x[0]) + x[1] + 0.5; });
    const auto [ulo, rl] = solve_dirichlet(lo);
    const auto [uhi, rh] = solve_dirichlet(hi);
    REQUIRE(rl.converged);
    REQUIRE(rh.converged);
    for (std::size_t i = 0; i < ulo.values.size(); ++i)
      CHECK(uhi.values[i] >= ulo.values[i] - 1e-7);
  }
}

TEST_CASE("solve_obstacle: inactive constraint reproduces the Dirichlet solution") {
  ObstacleProblem prob;
  prob.base = line_problem(48, 3.0, 0.0, 1.0);
  prob.obstacle = ScalarField(prob.base.grid, -1e6);
  const auto [w, rep] = solve_obstacle(prob);
  REQUIRE(rep.solve.converged);
  CHECK(rep.active_count == 0);
  const auto [u, drep] = solve_dirichlet(prob.base);
  for (std::size_t i = 0; i < w.values.size(); ++i)
    CHECK(w.values[i] == doctest::Approx(u.values[i]).epsilon(1e-6));
}

TEST_CASE("solve_obstacle: tent obstacle reaching the boundary chord is fully active") {
  // Obstacle above the unconstrained (zero-boundary) solution everywhere:
  // the tent itself is the minimizer, so every interior node is active.
  ObstacleProblem prob;
  prob.base = line_problem(64, 3.0, 0.0, 0.0);
  prob.obstacle = ScalarField(prob.base.grid);
  prob.base.grid.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    const double x = prob.base.grid.node_coords(mi)[0];
    prob.obstacle[i] = 0.5 - std::abs(x - 0.5);
  });
  prob.obstacle.values.front() = 0.0;
  prob.obstacle.values.back() = 0.0;
  const auto [w, rep] = solve_obstacle(prob);
  REQUIRE(rep.solve.converged);
  prob.base.grid.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    if (prob.base.grid.is_boundary(mi)) return;
    CHECK(w[i] == doctest::Approx(prob.obstacle[i]).epsilon(1e-7));
    CHECK(w[i] >= prob.obstacle[i]);  // projection keeps feasibility exactly
  });
  CHECK(rep.active_count > 50);
}

TEST_CASE("solve_obstacle: interior tent gives affine pieces tangent at the peak") {
  // Tent with negative feet: the solution is the concave envelope, affine
  // from each boundary point to the peak. Oracle: projected Gauss-Seidel
  // with per-node golden-section minimization, independent of the solver.
  const int cells = 96;
  ObstacleProblem prob;
  prob.base = line_problem(cells, 3.0, 0.0, 0.0);
  prob.obstacle = ScalarField(prob.base.grid);
  auto tent = [](double x) { return 0.4 - 1.6 * std::abs(x - 0.5); };
  prob.base.grid.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    prob.obstacle[i] = tent(prob.base.grid.node_coords(mi)[0]);
  });
  const auto [w, rep] = solve_obstacle(prob);
  REQUIRE(rep.solve.converged);

  // Independent oracle: many sweeps of exact per-node projected minimization.
  const double h = prob.base.grid.h[0];
  std::vector<double> v(w.values.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::max(0.0, prob.obstacle[static_cast<std::int64_t>(i)]);
  v.front() = 0.0;
  v.back() = 0.0;
  auto local_energy = [&](std::size_t i, double val) {
    const double dl = (val - v[i - 1]) / h;
    const double dr = (v[i + 1] - val) / h;
    return (std::pow(std::abs(dl), 3.0) + std::pow(std::abs(dr), 3.0)) * h / 3.0;
  };
  for (int sweep = 0; sweep < 4000; ++sweep) {
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      double lo = prob.obstacle[static_cast<std::int64_t>(i)];
      double a = lo, b = std::max(lo, std::max(v[i - 1], v[i + 1]) + 1.0);
      // Golden-section on the convex per-node energy.
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - gr * (b - a), d = a + gr * (b - a);
      for (int it = 0; it < 80; ++it) {
        if (local_energy(i, c) < local_energy(i, d)) b = d;
        else a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
      }
      v[i] = std::max(lo, 0.5 * (a + b));
    }
  }
  double max_diff = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    max_diff = std::max(max_diff, std::abs(v[i] - w.values[i]));
  CHECK(max_diff < 2e-3);

  // Structure: one active contact at the peak, affine legs elsewhere.
  CHECK(rep.active_count >= 1);
  CHECK(rep.active_count <= 3);
  const double slope_left = (w[cells / 4 + 1] - w[cells / 4]) / h;
  const double slope_left2 = (w[cells / 8 + 1] - w[cells / 8]) / h;
  CHECK(slope_left == doctest::Approx(slope_left2).epsilon(1e-3));
}

TEST_CASE("solve_obstacle rejects infeasible problems") {
  ObstacleProblem prob;
  prob.base = line_problem(16, 2.0, 0.0, 0.0);
  prob.obstacle = ScalarField(prob.base.grid, 1.0);  // above the zero boundary
  CHECK_THROWS_AS(solve_obstacle(prob), Error);
}

TEST_CASE("eigen sanity mode p=2 recovers the first Dirichlet eigenvalue pi^2") {
  const auto res = eigenfunction_U(Grid::line(0.0, 1.0, 128), 2.0);
  CHECK(std::abs(res.J0 - kPi * kPi) / (kPi * kPi) < 0.01);
}

TEST_CASE("rayleigh quotient is scale invariant") {
  const Grid g = Grid::line(0.0, 1.0, 40);
  ScalarField w(g);
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    const double x = g.node_coords(mi)[0];
    w[i] = x * (1.0 - x) * (1.3 + std::sin(5.0 * x));
  });
  w.values.front() = w.values.back() = 0.0;
  ScalarField w3 = w;
  for (auto& v : w3.values) v *= 3.0;
  const double a = rayleigh_quotient(w, 3.0);
  const double b = rayleigh_quotient(w3, 3.0);
  CHECK(std::abs(a - b) / a < 1e-13);
}

TEST_CASE("eigenfunction p=3 matches the shooting oracle and the normalization law") {
  const auto oracle = psuper_test::shoot_separable_profile(3.0);
  REQUIRE(oracle.first_zero > 0.0);

  SolverOptions opt;
  opt.tol = 1e-8;
  const auto res = eigenfunction_U(Grid::line(0.0, 1.0, 256), 3.0, opt);
  REQUIRE(res.converged);
  CHECK(res.residual < opt.tol);

  // Normalization identity J0 C^{p-2} (p-2) = 1 to near machine precision.
  CHECK(std::abs(res.J0 * res.C * (3.0 - 2.0) - 1.0) < 1e-10);

  double max_err = 0.0, scale = 0.0;
  res.U.grid.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    const double x = res.U.grid.node_coords(mi)[0];
    max_err = std::max(max_err, std::abs(res.U[i] - oracle.evaluate(x)));
    scale = std::max(scale, oracle.evaluate(x));
  });
  CHECK(max_err / scale < 0.01);

  // Interior positivity.
  res.U.grid.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    if (!res.U.grid.is_boundary(mi)) CHECK(res.U[i] > 0.0);
  });
}

TEST_CASE("eigenfunction is independent of the positive start") {
  const Grid g = Grid::line(0.0, 1.0, 64);
  SolverOptions opt;
  opt.tol = 1e-9;
  const auto a = eigenfunction_U(g, 3.0, opt);
  ScalarField start(g);
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    const double x = g.node_coords(mi)[0];
    start[i] = x * (1.0 - x) * (1.0 + 0.8 * std::cos(7.0 * x));
  });
  const auto b = eigenfunction_U(g, 3.0, opt, &start);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.U.values.size(); ++i)
    diff = std::max(diff, std::abs(a.U.values[i] - b.U.values[i]));
  CHECK(diff < 1e-6);  // well within 10x the solver tolerance scale
}

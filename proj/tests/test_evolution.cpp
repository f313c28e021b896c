#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "psuper/closed_forms.hpp"
#include "psuper/evolution.hpp"
#include "psuper/variational.hpp"

using namespace psuper;

namespace {

std::vector<std::uint8_t> boundary_ring_interior(const Grid& g) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.node_count()), 0);
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    mask[static_cast<std::size_t>(i)] = g.is_boundary(mi) ? 0 : 1;
  });
  return mask;
}

const ScalarField& eigen_profile_64() {
  static ScalarField U = [] {
    SolverOptions opt;
    opt.tol = 1e-9;
    return eigenfunction_U(Grid::line(0.0, 1.0, 64), 3.0, opt).U;
  }();
  return U;
}

}  // namespace

TEST_CASE("prox step keeps constants and affine profiles fixed") {
  const Grid g = Grid::line(0.0, 1.0, 32);
  const auto interior = boundary_ring_interior(g);

  ScalarField c(g, 2.5);
  std::vector<double> bc(c.values.size(), 2.5);
  for (double dt : {1e-3, 0.1, 10.0}) {
    const auto [next, rep] = prox_step(c, 3.0, dt, bc, interior);
    REQUIRE(rep.converged);
    for (double v : next.values) CHECK(std::abs(v - 2.5) < 1e-7);
  }

  ScalarField aff(g);
  std::vector<double> bca(aff.values.size(), 0.0);
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    aff[i] = 2.0 * g.node_coords(mi)[0] - 0.5;
    bca[static_cast<std::size_t>(i)] = aff[i];
  });
  const auto [next, rep] = prox_step(aff, 3.0, 0.05, bca, interior);
  REQUIRE(rep.converged);
  for (std::size_t i = 0; i < aff.values.size(); ++i)
    CHECK(std::abs(next.values[i] - aff.values[i]) < 1e-7);
}

TEST_CASE("one prox step tracks the separable amplitude to O(dt^2)") {
  const ScalarField& U = eigen_profile_64();
  const Grid& g = U.grid;
  const auto interior = boundary_ring_interior(g);
  const double s = 1.0;
  auto amplitude_error = [&](double dt) {
    ScalarField u0 = U;  // U(x) s^{-1/(p-2)} at s = 1
    std::vector<double> bc(u0.values.size(), 0.0);
    SolverOptions opt;
    opt.tol = 1e-11;
    const auto [next, rep] = prox_step(u0, 3.0, dt, bc, interior, opt);
    REQUIRE(rep.converged);
    double err = 0.0;
    for (std::size_t i = 0; i < next.values.size(); ++i) {
      const double exact = U.values[i] / (s + dt);
      err = std::max(err, std::abs(next.values[i] - exact));
    }
    return err;
  };
  const double e1 = amplitude_error(0.02);
  const double e2 = amplitude_error(0.01);
  CHECK(e2 < 0.35 * e1);  // second-order in dt
}

TEST_CASE("evolve: zero data stays zero") {
  const SpaceTimeGrid stg(Grid::line(0.0, 1.0, 16), 0.0, 1.0, 8);
  EvolutionProblem prob;
  prob.stgrid = stg;
  prob.p = 3.0;
  prob.initial = ScalarField(stg.space, 0.0);
  prob.lateral = [](const Point&, double) { return 0.0; };
  const auto [v, rep] = evolve(prob);
  REQUIRE(rep.converged);
  CHECK(v.max_abs() < 1e-10);
}

TEST_CASE("evolve tracks the Barenblatt solution to 2% at h = 1/256") {
  const BarenblattParams bp{3.0, 1, 1.0};
  const int cells = 2176;  // h = 1/256 over (-4.25, 4.25)
  const SpaceTimeGrid stg(Grid::line(-4.25, 4.25, cells), 1.0, 2.0, 256);
  EvolutionProblem prob;
  prob.stgrid = stg;
  prob.p = 3.0;
  SampleOptions at1;
  at1.at_time = 1.0;
  prob.initial = sample(ClosedForm{bp}, stg.space, at1);
  // exact lateral data (identically zero: the support never reaches the walls)
  prob.lateral = [&](const Point& x, double t) { return bp.evaluate(x, t); };
  SolverOptions opt;
  opt.tol = 1e-9;
  const auto [v, rep] = evolve(prob, opt);
  REQUIRE(rep.converged);
  double err = 0.0, scale = 0.0;
  for (int k = 0; k <= stg.time_steps; ++k) {
    const double t = stg.slice_time(k);
    stg.space.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
      const double exact = bp.evaluate(stg.space.node_coords(mi), t);
      err = std::max(err, std::abs(v.slice(k)[i] - exact));
      scale = std::max(scale, exact);
    });
  }
  CHECK(err / scale < 0.02);
}

TEST_CASE("evolve dissipation ledger: prox inequality holds every step") {
  const SpaceTimeGrid stg(Grid::line(0.0, 1.0, 64), 0.0, 0.5, 32);
  EvolutionProblem prob;
  prob.stgrid = stg;
  prob.p = 3.0;
  prob.initial = ScalarField(stg.space);
  stg.space.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    const double x = stg.space.node_coords(mi)[0];
    prob.initial[i] = std::sin(3.14159 * x) + 0.3 * std::sin(9.0 * x);
  });
  prob.initial.values.front() = prob.initial.values.back() = 0.0;
  prob.lateral = [](const Point&, double) { return 0.0; };
  const auto [v, rep] = evolve(prob);
  REQUIRE(rep.converged);
  for (double slack : rep.dissipation_slack) CHECK(slack >= -1e-7);
  for (std::size_t k = 1; k < rep.step_energies.size(); ++k)
    CHECK(rep.step_energies[k] <= rep.step_energies[k - 1] + 1e-10);
}

TEST_CASE("evolve conserves mass for compactly supported data away from walls") {
  const SpaceTimeGrid stg(Grid::line(-3.0, 3.0, 192), 0.0, 0.5, 64);
  EvolutionProblem prob;
  prob.stgrid = stg;
  prob.p = 3.0;
  prob.initial = ScalarField(stg.space);
  stg.space.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    const double x = stg.space.node_coords(mi)[0];
    prob.initial[i] = std::abs(x) < 1.0 ? (1.0 - x * x) * (1.0 - x * x) : 0.0;
  });
  prob.lateral = [](const Point&, double) { return 0.0; };
  const auto [v, rep] = evolve(prob);
  REQUIRE(rep.converged);
  auto mass = [&](const ScalarField& f) {
    double m = 0.0;
    f.grid.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
      m += f.grid.node_volume(mi) * f[i];
    });
    return m;
  };
  const double m0 = mass(v.slice(0));
  const double m1 = mass(v.slice(stg.time_steps));
  CHECK(std::abs(m1 - m0) / m0 < 0.01);
}

TEST_CASE("evolved separable data decays with the (t)^{-1/(p-2)} power law") {
  const ScalarField& U = eigen_profile_64();
  const SpaceTimeGrid stg(U.grid, 0.0, 1.0, 128);
  EvolutionProblem prob;
  prob.stgrid = stg;
  prob.p = 3.0;
  prob.initial = U;  // amplitude 1 at s = 1
  prob.lateral = [](const Point&, double) { return 0.0; };
  const auto [v, rep] = evolve(prob);
  REQUIRE(rep.converged);
  // log-log fit of max_x v against (1 + t): exponent -1/(p-2) = -1 within 5%.
  std::vector<double> lx, ly;
  for (int k = 8; k <= stg.time_steps; k += 8) {
    lx.push_back(std::log(1.0 + stg.slice_time(k)));
    ly.push_back(std::log(v.slice(k).max_value()));
  }
  double slope = 0.0;
  {
    const double nn = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  }
  CHECK(std::abs(slope - (-1.0)) < 0.05);
}

TEST_CASE("comparison_check: trivial pairs and boundary validation") {
  const SpaceTimeGrid stg(Grid::line(0.0, 1.0, 16), 0.0, 1.0, 8);
  SpaceTimeField a(stg, 1.0), b(stg, 1.0);
  const auto same = comparison_check(a, b, 3.0);
  CHECK(same.worst_violation == 0.0);
  for (auto& s : b.slices)
    for (auto& v : s.values) v += 1.0;
  const auto plus = comparison_check(a, b, 3.0);
  CHECK(plus.worst_violation == 1.0);
  CHECK_THROWS_WITH_AS(comparison_check(b, a, 3.0),
                       "comparison_check: initial-slice ordering violated", Error);
  // Lateral violation: mess up one boundary node at a later slice.
  SpaceTimeField c = b;
  c.slice(3).values.front() = -5.0;
  CHECK_THROWS_WITH_AS(comparison_check(a, c, 3.0),
                       "comparison_check: lateral-boundary ordering violated", Error);
}

TEST_CASE("evolved ordered data stays ordered (discrete comparison principle)") {
  const SpaceTimeGrid stg(Grid::line(0.0, 1.0, 64), 0.0, 0.5, 32);
  EvolutionProblem lo, hi;
  lo.stgrid = hi.stgrid = stg;
  lo.p = hi.p = 3.0;
  lo.initial = ScalarField(stg.space, 0.0);
  hi.initial = ScalarField(stg.space);
  stg.space.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    const double x = stg.space.node_coords(mi)[0];
    hi.initial[i] = 0.2 + x * (1.0 - x);
  });
  lo.lateral = [](const Point&, double) { return 0.0; };
  hi.lateral = [](const Point&, double t) { return 0.2 + 0.1 * t; };
  const auto [vlo, rl] = evolve(lo);
  const auto [vhi, rh] = evolve(hi);
  REQUIRE(rl.converged);
  REQUIRE(rh.converged);
  const auto rep = comparison_check(vlo, vhi, 3.0);
  CHECK(rep.worst_violation > -1e-7);
}

TEST_CASE("classify: sampled Barenblatt is class B") {
  const BarenblattParams bp{3.0, 1, 1.0};
  const SpaceTimeGrid stg(Grid::line(-2.0, 2.0, 256), 0.0, 1.0, 256);
  const auto v = sample(ClosedForm{bp}, stg);
  const auto verdict = classify(v, 3.0);
  CHECK(verdict.tag == SupersolutionClass::ClassB);
  CHECK(verdict.worst_slab_slope < 0.1);
}

TEST_CASE("classify: sampled separable field is class M with t0 near 0") {
  auto U = std::make_shared<ScalarField>(eigen_profile_64());
  const SeparableParams sep{U, 0.0, 3.0};
  const SpaceTimeGrid stg(Grid::line(0.0, 1.0, 64), -0.25, 0.75, 256);
  const auto v = sample(ClosedForm{sep}, stg);
  const auto verdict = classify(v, 3.0);
  CHECK(verdict.tag == SupersolutionClass::ClassM);
  CHECK(std::abs(verdict.t0 - 0.0) <= stg.dt());
  CHECK(std::abs(verdict.fitted_exponent - (-1.0)) < 0.1);
  CHECK(verdict.worst_slab_slope > 0.2);
}

TEST_CASE("classify: bounded fields are class B; rescaled Barenblatt stays class B") {
  const SpaceTimeGrid stg(Grid::line(0.0, 1.0, 64), 0.0, 1.0, 64);
  SpaceTimeField v(stg);
  for (int k = 0; k <= 64; ++k)
    for (auto& x : v.slice(k).values) x = 1.0 + 0.2 * std::sin(0.3 * k);
  CHECK(classify(v, 3.0).tag == SupersolutionClass::ClassB);

  // c u(x, c^{p-2} t) solves the same equation; classify is invariant.
  const BarenblattParams bp{3.0, 1, 1.0};
  const double c = 3.0;
  const SpaceTimeGrid stg2(Grid::line(-2.0, 2.0, 128), 0.0, 1.0 / c, 128);
  SpaceTimeField w(stg2);
  for (int k = 0; k <= 128; ++k) {
    const double t = stg2.slice_time(k);
    stg2.space.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
      w.slice(k)[i] = c * bp.evaluate(stg2.space.node_coords(mi), c * t);
    });
  }
  CHECK(classify(w, 3.0).tag == SupersolutionClass::ClassB);
}

TEST_CASE("blow-up time is slice-wide: per-node fits agree within one time step") {
  auto U = std::make_shared<ScalarField>(eigen_profile_64());
  const SeparableParams sep{U, 0.1, 3.0};
  const SpaceTimeGrid stg(Grid::line(0.0, 1.0, 64), -0.1, 0.9, 200);
  const auto v = sample(ClosedForm{sep}, stg);
  double lo = kInf, hi = -kInf;
  stg.space.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    if (mi[0] < 8 || mi[0] > 56) return;  // solid interior
    const auto t0 = fit_node_blowup_time(v, 3.0, i);
    REQUIRE(t0.has_value());
    lo = std::min(lo, *t0);
    hi = std::max(hi, *t0);
  });
  CHECK(hi - lo <= stg.dt());
  CHECK(std::abs(lo - 0.1) <= stg.dt());
}

TEST_CASE("riesz measure refuses class-M input") {
  auto U = std::make_shared<ScalarField>(eigen_profile_64());
  const SeparableParams sep{U, 0.0, 3.0};
  const SpaceTimeGrid stg(Grid::line(0.0, 1.0, 64), -0.25, 0.75, 256);
  const auto v = sample(ClosedForm{sep}, stg);
  CHECK_THROWS_AS(riesz_measure(v, 3.0, 1e-8), Error);
}

TEST_CASE("riesz measure of an evolve output vanishes to solver tolerance") {
  const SpaceTimeGrid stg(Grid::line(0.0, 1.0, 64), 0.0, 0.5, 64);
  EvolutionProblem prob;
  prob.stgrid = stg;
  prob.p = 3.0;
  prob.initial = ScalarField(stg.space);
  stg.space.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    const double x = stg.space.node_coords(mi)[0];
    prob.initial[i] = x * x * (1.0 - x);
  });
  prob.lateral = [&](const Point& x, double) { return x[0] * x[0] * (1.0 - x[0]); };
  SolverOptions opt;
  opt.tol = 1e-9;
  const auto [v, rep] = evolve(prob, opt);
  REQUIRE(rep.converged);
  const auto mu = riesz_measure(v, 3.0, 1e-8);
  const double volume = 1.0 * 0.5;  // |Omega x (0,T)|
  CHECK(mu.total + mu.clamped_negative_total <= opt.tol * volume);
}

TEST_CASE("riesz measure of a time step is the spatial volume on the jump layer") {
  const SpaceTimeGrid stg(Grid::line(0.0, 1.0, 32), 0.0, 1.0, 16);
  SpaceTimeField v(stg);
  const int jump = 8;  // v = 0 for t <= t*, 1 after
  for (int k = 0; k <= 16; ++k)
    for (auto& x : v.slice(k).values) x = k > jump ? 1.0 : 0.0;
  const auto mu = riesz_measure(v, 3.0, 1e-12, false);
  // Total mass = interior spatial volume; concentrated on the jump layer.
  double on_layer = 0.0;
  for (int k = jump; k <= jump + 1; ++k)
    stg.space.for_each_node([&](std::int64_t i, const std::array<int, 3>&) {
      on_layer += mu.mass_at(k, i);
    });
  const double interior_vol = 1.0 - stg.space.h[0];  // lumped interior volume
  CHECK(mu.total == doctest::Approx(interior_vol).epsilon(1e-12));
  CHECK(on_layer == doctest::Approx(mu.total).epsilon(1e-12));
  CHECK(mu.clamped_negative_total == 0.0);
}

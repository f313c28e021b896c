#include "psuper/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "psuper/regularity.hpp"

namespace psuper {

void EvolutionProblem::validate() const {
  require(p >= 2.0, "evolve: p must be >= 2");
  require(initial.grid.same_layout(stgrid.space),
          "evolve: initial slice does not match the spatial grid");
  require(!initial.has_infinite(), "evolve: initial data must be finite");
  require(static_cast<bool>(lateral), "evolve: lateral boundary data missing");
}

std::pair<SpaceTimeField, EvolveReport> evolve(const EvolutionProblem& prob,
                                               const SolverOptions& opt) {
  prob.validate();
  const Grid& g = prob.stgrid.space;
  const std::size_t n = static_cast<std::size_t>(g.node_count());
  std::vector<std::uint8_t> interior(n, 0);
  std::vector<double> node_vol(n, 0.0);
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    interior[static_cast<std::size_t>(i)] = g.is_boundary(mi) ? 0 : 1;
    node_vol[static_cast<std::size_t>(i)] = g.node_volume(mi);
  });

  SpaceTimeField out(prob.stgrid);
  out.slice(0) = prob.initial;
  // Initial slice carries the lateral data at its boundary ring.
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    if (!interior[static_cast<std::size_t>(i)])
      out.slice(0)[i] = prob.lateral(g.node_coords(mi), prob.stgrid.t0);
  });

  EvolveReport rep;
  rep.converged = true;
  const double dt = prob.stgrid.dt();
  std::vector<double> boundary(n, 0.0);
  double e_prev = p_energy(out.slice(0), prob.p);
  for (int k = 0; k < prob.stgrid.time_steps; ++k) {
    const double t_next = prob.stgrid.slice_time(k + 1);
    g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
      if (!interior[static_cast<std::size_t>(i)])
        boundary[static_cast<std::size_t>(i)] =
            prob.lateral(g.node_coords(mi), t_next);
    });
    auto [next, srep] = prox_step(out.slice(k), prob.p, dt, boundary, interior, opt);
    rep.step_iterations.push_back(srep.iterations);
    if (!srep.converged) {
      rep.converged = false;
      rep.failed_step = k;
      rep.message = "step " + std::to_string(k) + " failed: " + srep.message;
      out.slice(k + 1) = next;
      return {std::move(out), rep};
    }
    const double e_next = srep.energy;
    double move = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!interior[i]) continue;
      const double d = next.values[i] - out.slice(k).values[i];
      move += node_vol[i] * d * d;
    }
    rep.step_energies.push_back(e_next);
    rep.dissipation_slack.push_back(e_prev - e_next - move / dt);
    e_prev = e_next;
    out.slice(k + 1) = std::move(next);
  }
  rep.message = "converged";
  return {std::move(out), rep};
}

ComparisonReport comparison_check(const SpaceTimeField& sub,
                                  const SpaceTimeField& super, double p) {
  require(p >= 2.0, "comparison_check: p must be >= 2");
  require(sub.stgrid.space.same_layout(super.stgrid.space) &&
              sub.stgrid.time_steps == super.stgrid.time_steps,
          "comparison_check: fields must share the cylinder");
  const Grid& g = sub.stgrid.space;

  // Parabolic boundary = initial slice + lateral ring on every slice.
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>&) {
    require(super.slice(0)[i] >= sub.slice(0)[i] - 1e-14,
            "comparison_check: initial-slice ordering violated");
  });
  for (int k = 0; k <= sub.stgrid.time_steps; ++k) {
    g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
      if (g.is_boundary(mi))
        require(super.slice(k)[i] >= sub.slice(k)[i] - 1e-14,
                "comparison_check: lateral-boundary ordering violated");
    });
  }

  ComparisonReport rep;
  rep.worst_violation = kInf;
  for (int k = 1; k <= sub.stgrid.time_steps; ++k) {
    g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
      if (g.is_boundary(mi)) return;
      const double gap = super.slice(k)[i] - sub.slice(k)[i];
      if (gap < rep.worst_violation) {
        rep.worst_violation = gap;
        rep.worst_node = mi;
        rep.worst_slice = k;
      }
    });
  }
  return rep;
}

namespace {

/// L^{p-2} integral of a decimated sample over a spatial box and time slab.
/// Stride s keeps every s-th node/slice: the coarse sample the finer grid
/// refines, so level integrals form a genuine resolution ladder.
double slab_integral(const SpaceTimeField& v, double q, const Box& box,
                     int slab_lo, int slab_hi, int stride) {
  const Grid& g = v.stgrid.space;
  const double dt = v.stgrid.dt() * stride;
  std::array<double, 3> h{0, 0, 0};
  std::array<int, 3> cells{1, 1, 1};
  for (int a = 0; a < g.dim; ++a) {
    cells[a] = g.cells[a] / stride;
    h[a] = g.h[a] * stride;
  }
  double vol = dt;
  for (int a = 0; a < g.dim; ++a) vol *= h[a];
  const int corners = 1 << g.dim;

  double total = 0.0;
  for (int k = slab_lo; k + stride <= slab_hi; k += stride) {
    const auto& lo = v.slice(k);
    const auto& hi = v.slice(k + stride);
    std::array<int, 3> mc{0, 0, 0};
    const int c0 = cells[0];
    const int c1 = g.dim > 1 ? cells[1] : 1;
    const int c2 = g.dim > 2 ? cells[2] : 1;
    for (mc[0] = 0; mc[0] < c0; ++mc[0])
      for (mc[1] = 0; mc[1] < c1; ++mc[1])
        for (mc[2] = 0; mc[2] < c2; ++mc[2]) {
          Point center{0, 0, 0};
          for (int a = 0; a < g.dim; ++a)
            center[a] = g.origin[a] + (mc[a] + 0.5) * h[a];
          if (!box.contains(center, g.dim)) continue;
          double mean = 0.0;
          for (int c = 0; c < corners; ++c) {
            std::array<int, 3> mi = mc;
            for (int a = 0; a < g.dim; ++a)
              if (c & (1 << a)) mi[a] += 1;
            for (int a = 0; a < g.dim; ++a) mi[a] *= stride;
            const double va = lo.at(mi);
            const double vb = hi.at(mi);
            if (va == kInf || vb == kInf) return kInf;
            mean += 0.5 * (std::pow(std::abs(va), q) + std::pow(std::abs(vb), q));
          }
          total += vol * mean / corners;
        }
  }
  return total;
}

}  // namespace

std::optional<double> fit_node_blowup_time(const SpaceTimeField& v, double p,
                                           std::int64_t node) {
  // v = U (t-t0)^{-1/(p-2)} makes w = v^{-(p-2)} exactly linear in t.
  std::vector<double> ts, ws;
  for (int k = 0; k <= v.stgrid.time_steps; ++k) {
    const double val = v.slice(k)[node];
    if (val <= 0.0 || val == kInf) continue;
    ts.push_back(v.stgrid.slice_time(k));
    ws.push_back(std::pow(val, -(p - 2.0)));
  }
  if (ts.size() < 3) return std::nullopt;
  const double a = fit_slope(ts, ws);
  if (a <= 0.0) return std::nullopt;
  double tbar = 0.0, wbar = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tbar += ts[i];
    wbar += ws[i];
  }
  tbar /= ts.size();
  wbar /= ws.size();
  const double b = wbar - a * tbar;  // w = a t + b, zero at t0 = -b/a
  return -b / a;
}

ClassVerdict classify(const SpaceTimeField& v, double p,
                      const ClassifyOptions& opt) {
  require(p > 2.0, "classify: requires p > 2 (no unbounded class at p = 2)");
  const Grid& g = v.stgrid.space;
  require(v.stgrid.time_steps % 4 == 0,
          "classify: time_steps must be divisible by 4 for the decimation ladder");
  for (int a = 0; a < g.dim; ++a)
    require(g.cells[a] % 4 == 0,
            "classify: cells_per_axis must be divisible by 4 for the decimation ladder");

  const double q = p - 2.0;
  Box box = g.bounding_box();
  for (int a = 0; a < g.dim; ++a) {
    const double cut = opt.interior_shrink * g.extent[a];
    box.lo[a] += cut;
    box.hi[a] -= cut;
  }

  ClassVerdict verdict;
  const int slabs = std::min(opt.slabs, std::max(1, v.stgrid.time_steps / 4));
  const int per_slab = v.stgrid.time_steps / slabs;
  const std::array<int, 3> strides{4, 2, 1};
  int divergent_slabs = 0;
  bool any_midband = false;
  double worst = -kInf;
  for (int s = 0; s < slabs; ++s) {
    const int lo = s * per_slab;
    const int hi = (s + 1 == slabs) ? v.stgrid.time_steps : (s + 1) * per_slab;
    std::vector<double> xs, ys;
    bool infinite = false;
    for (int li = 0; li < 3; ++li) {
      const double integral = slab_integral(v, q, box, lo, hi, strides[li]);
      if (integral == kInf) {
        infinite = true;
        break;
      }
      if (integral <= 0.0) continue;
      xs.push_back(li * std::log(2.0));  // log(1/dt) up to a constant
      ys.push_back(std::log(integral));
    }
    double slope;
    if (infinite) {
      slope = kInf;
    } else if (xs.size() < 2) {
      slope = 0.0;  // numerically empty slab
    } else {
      slope = fit_slope(xs, ys);
    }
    worst = std::max(worst, slope);
    if (slope > opt.divergent_slope) ++divergent_slabs;
    else if (slope >= opt.flat_slope) any_midband = true;
  }
  verdict.worst_slab_slope = worst;

  if (divergent_slabs == 0) {
    if (any_midband) {
      verdict.tag = SupersolutionClass::Indeterminate;
      verdict.detail = "slab slope in the dead band (no verdict)";
    } else {
      verdict.tag = SupersolutionClass::ClassB;
      verdict.detail = "all L^{p-2} slab integrals flat under refinement";
    }
    return verdict;
  }

  // Blow-up side: locate the slice where the spatial minimum peaks, fit t0
  // from the linearized law, then the decay exponent with the 3 slices
  // nearest t0 excluded from the window.
  std::vector<double> mins(static_cast<std::size_t>(v.stgrid.time_steps) + 1, 0.0);
  std::vector<std::int64_t> box_nodes;
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    if (box.contains(g.node_coords(mi), g.dim)) box_nodes.push_back(i);
  });
  require(!box_nodes.empty(), "classify: interior box contains no nodes");
  int jmax = 0;
  for (int k = 0; k <= v.stgrid.time_steps; ++k) {
    double m = kInf;
    for (std::int64_t i : box_nodes) m = std::min(m, v.slice(k)[i]);
    mins[static_cast<std::size_t>(k)] = m;
    if (m > mins[static_cast<std::size_t>(jmax)] || m == kInf) jmax = k;
  }

  // t0 as the median of the per-node linearized fits.
  std::vector<double> t0s;
  for (std::size_t idx = 0; idx < box_nodes.size(); idx += std::max<std::size_t>(1, box_nodes.size() / 64)) {
    if (auto t0 = fit_node_blowup_time(v, p, box_nodes[idx])) t0s.push_back(*t0);
  }
  if (t0s.empty()) {
    verdict.tag = SupersolutionClass::Indeterminate;
    verdict.detail = "divergent slab but no coherent blow-up time";
    return verdict;
  }
  std::nth_element(t0s.begin(), t0s.begin() + t0s.size() / 2, t0s.end());
  const double t0 = t0s[t0s.size() / 2];
  if (!(t0 > v.stgrid.t0 && t0 < v.stgrid.t1)) {
    verdict.tag = SupersolutionClass::Indeterminate;
    verdict.detail = "fitted blow-up time outside the open time interval";
    return verdict;
  }

  const double dt = v.stgrid.dt();
  std::vector<double> lx, ly;
  for (int k = 0; k <= v.stgrid.time_steps; ++k) {
    const double t = v.stgrid.slice_time(k);
    const double m = mins[static_cast<std::size_t>(k)];
    if (t - t0 < 3.0 * dt) continue;  // exclude the 3 slices nearest t0
    if (m <= 0.0 || m == kInf) continue;
    lx.push_back(std::log(t - t0));
    ly.push_back(std::log(m));
  }
  if (lx.size() < 4) {
    verdict.tag = SupersolutionClass::Indeterminate;
    verdict.detail = "too few slices after the blow-up time for an exponent fit";
    return verdict;
  }
  const double expo = fit_slope(lx, ly);
  const double target = -1.0 / (p - 2.0);
  verdict.fitted_exponent = expo;
  verdict.t0 = t0;
  // Lower-bound constant of the extracted minorant min v >= c (t-t0)^{-1/(p-2)}.
  double c = kInf;
  for (std::size_t i = 0; i < lx.size(); ++i)
    c = std::min(c, std::exp(ly[i] - target * lx[i]));
  verdict.lower_bound_constant = c;
  if (std::abs(expo - target) <= opt.exponent_rtol * std::abs(target)) {
    verdict.tag = SupersolutionClass::ClassM;
    verdict.detail = "divergent L^{p-2} slab and slice-wide blow-up at t0";
  } else {
    verdict.tag = SupersolutionClass::Indeterminate;
    verdict.detail = "divergent slab but decay exponent outside tolerance";
  }
  return verdict;
}

DiscreteMeasure riesz_measure(const SpaceTimeField& v, double p,
                              double clamp_tol, bool check_class) {
  require(p >= 2.0, "riesz_measure: p must be >= 2");
  if (check_class) {
    const ClassVerdict cls = classify(v, p);
    require(cls.tag != SupersolutionClass::ClassM,
            "riesz_measure: class-M input induces no sigma-finite measure");
  }
  const Grid& g = v.stgrid.space;
  const std::size_t n = static_cast<std::size_t>(g.node_count());
  const double dt = v.stgrid.dt();
  std::vector<double> node_vol(n, 0.0);
  std::vector<std::uint8_t> interior(n, 0);
  g.for_each_node([&](std::int64_t i, const std::array<int, 3>& mi) {
    node_vol[static_cast<std::size_t>(i)] = g.node_volume(mi);
    interior[static_cast<std::size_t>(i)] = g.is_boundary(mi) ? 0 : 1;
  });

  DiscreteMeasure out;
  out.stgrid = v.stgrid;
  out.masses.assign(static_cast<std::size_t>(v.stgrid.slice_count()) * n, 0.0);
  out.min_raw_mass = 0.0;
  std::vector<double> eg(n, 0.0);
  for (int k = 1; k <= v.stgrid.time_steps; ++k) {
    std::fill(eg.begin(), eg.end(), 0.0);
    accumulate_energy_gradient(v.slice(k), p, eg);
    const std::size_t koff = static_cast<std::size_t>(k) * n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!interior[i]) continue;
      const double dv = v.slice(k).values[i] - v.slice(k - 1).values[i];
      const double raw = node_vol[i] * dv + dt * eg[i];
      out.min_raw_mass = std::min(out.min_raw_mass, raw);
      if (raw >= 0.0) {
        out.masses[koff + i] = raw;
        out.total += raw;
      } else {
        out.clamped_negative_total += -raw;
      }
    }
  }
  (void)clamp_tol;  // retained in reports; all negatives are clamped + tallied
  return out;
}

}  // namespace psuper

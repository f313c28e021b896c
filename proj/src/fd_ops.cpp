#include "psuper/fd_ops.hpp"

#include <algorithm>
#include <cmath>

namespace psuper {

CellStencil::CellStencil(const Grid& g) : dim(g.dim), corners(1 << g.dim) {
  std::array<std::int64_t, 3> stride{0, 0, 0};
  stride[dim - 1] = 1;
  for (int a = dim - 2; a >= 0; --a) stride[a] = stride[a + 1] * g.nodes_along(a + 1);
  for (int c = 0; c < corners; ++c) {
    std::int64_t off = 0;
    for (int a = 0; a < dim; ++a)
      if (c & (1 << a)) off += stride[a];
    offset[c] = off;
  }
  const double denom = static_cast<double>(1 << (dim - 1));
  for (int a = 0; a < dim; ++a) dcoef[a] = 1.0 / (denom * g.h[a]);
}

VectorField gradient(const ScalarField& f) {
  require(!f.has_infinite(), "gradient: truncate before differentiating");
  const Grid& g = f.grid;
  VectorField out(g);
  g.for_each_node([&](std::int64_t idx, const std::array<int, 3>& mi) {
    for (int a = 0; a < g.dim; ++a) {
      std::array<int, 3> lo = mi, hi = mi, hi2 = mi;
      const int n = g.cells[a];
      double d;
      if (mi[a] == 0) {
        hi[a] = 1;
        hi2[a] = 2;
        d = (-3.0 * f.at(mi) + 4.0 * f.at(hi) - f.at(hi2)) / (2.0 * g.h[a]);
      } else if (mi[a] == n) {
        lo[a] = n - 1;
        hi2[a] = n - 2;
        d = (3.0 * f.at(mi) - 4.0 * f.at(lo) + f.at(hi2)) / (2.0 * g.h[a]);
      } else {
        lo[a] = mi[a] - 1;
        hi[a] = mi[a] + 1;
        d = (f.at(hi) - f.at(lo)) / (2.0 * g.h[a]);
      }
      out.comp[a][static_cast<std::size_t>(idx)] = d;
    }
  });
  return out;
}

void accumulate_energy_gradient(const ScalarField& f, double p,
                                std::vector<double>& out) {
  const Grid& g = f.grid;
  const CellStencil st(g);
  const double vol = g.cell_volume();
  g.for_each_cell([&](std::int64_t, const std::array<int, 3>& mc) {
    const std::int64_t base = g.node_index(mc);
    const auto grad = st.gradient(f.values, base);
    double g2 = 0.0;
    for (int a = 0; a < g.dim; ++a) g2 += grad[a] * grad[a];
    const double w = vol * degenerate_weight(g2, p);
    if (w == 0.0) return;
    for (int c = 0; c < st.corners; ++c) {
      double acc = 0.0;
      for (int a = 0; a < g.dim; ++a) acc += grad[a] * st.dgrad(a, c);
      out[static_cast<std::size_t>(base + st.offset[c])] += w * acc;
    }
  });
}

double p_energy(const ScalarField& f, double p) {
  const Grid& g = f.grid;
  const CellStencil st(g);
  const double vol = g.cell_volume();
  double total = 0.0;
  g.for_each_cell([&](std::int64_t, const std::array<int, 3>& mc) {
    const auto grad = st.gradient(f.values, g.node_index(mc));
    double g2 = 0.0;
    for (int a = 0; a < g.dim; ++a) g2 += grad[a] * grad[a];
    total += std::pow(g2, 0.5 * p);
  });
  return total * vol / p;
}

ScalarField p_flux_divergence(const ScalarField& f, double p) {
  require(p >= 2.0, "p_flux_divergence: unsupported exponent, p must be >= 2");
  require(!f.has_infinite(), "p_flux_divergence: truncate before differentiating");
  const Grid& g = f.grid;
  std::vector<double> eg(static_cast<std::size_t>(g.node_count()), 0.0);
  accumulate_energy_gradient(f, p, eg);
  ScalarField out(g, 0.0);
  const double inv_vol = 1.0 / g.cell_volume();
  g.for_each_node([&](std::int64_t idx, const std::array<int, 3>& mi) {
    if (!g.is_boundary(mi))
      out[idx] = -eg[static_cast<std::size_t>(idx)] * inv_vol;
  });
  return out;
}

namespace {

// Mean of |f|^q over the cell corners; +inf corners dominate.
double cell_power_mean(const std::vector<double>& f, const CellStencil& st,
                       std::int64_t base, double q) {
  double s = 0.0;
  for (int c = 0; c < st.corners; ++c) {
    const double v = f[static_cast<std::size_t>(base + st.offset[c])];
    if (v == kInf) return kInf;
    s += std::pow(std::abs(v), q);
  }
  return s / st.corners;
}

}  // namespace

double lq_integral(const ScalarField& f, double q, const Box& region) {
  require(q > 0.0, "lq_norm: q must be positive");
  const Grid& g = f.grid;
  const CellStencil st(g);
  const double vol = g.cell_volume();
  double total = 0.0;
  std::int64_t used = 0;
  g.for_each_cell([&](std::int64_t, const std::array<int, 3>& mc) {
    if (!region.contains(g.cell_center(mc), g.dim)) return;
    ++used;
    const double m = cell_power_mean(f.values, st, g.node_index(mc), q);
    if (m == kInf) {
      total = kInf;
      return;
    }
    if (total != kInf) total += m * vol;
  });
  require(used > 0, "lq_norm: empty region");
  return total;
}

double lq_norm(const ScalarField& f, double q, const Box& region) {
  const double integral = lq_integral(f, q, region);
  return integral == kInf ? kInf : std::pow(integral, 1.0 / q);
}

double lq_norm(const VectorField& f, double q, const Box& region) {
  require(q > 0.0, "lq_norm: q must be positive");
  const Grid& g = f.grid;
  ScalarField mag(g);
  g.for_each_node([&](std::int64_t idx, const std::array<int, 3>&) {
    mag[idx] = f.magnitude(idx);
  });
  return lq_norm(mag, q, region);
}

double lq_integral(const SpaceTimeField& f, double q, const Box& space_region,
                   double time_lo, double time_hi) {
  require(q > 0.0, "lq_norm: q must be positive");
  const Grid& g = f.stgrid.space;
  const CellStencil st(g);
  const double vol = g.cell_volume() * f.stgrid.dt();
  double total = 0.0;
  std::int64_t used = 0;
  for (int k = 0; k < f.stgrid.time_steps; ++k) {
    const double tc = f.stgrid.slice_time(k) + 0.5 * f.stgrid.dt();
    if (tc < time_lo || tc > time_hi) continue;
    const auto& lo = f.slice(k).values;
    const auto& hi = f.slice(k + 1).values;
    g.for_each_cell([&](std::int64_t, const std::array<int, 3>& mc) {
      if (!space_region.contains(g.cell_center(mc), g.dim)) return;
      ++used;
      const std::int64_t base = g.node_index(mc);
      const double a = cell_power_mean(lo, st, base, q);
      const double b = cell_power_mean(hi, st, base, q);
      if (a == kInf || b == kInf) {
        total = kInf;
        return;
      }
      if (total != kInf) total += 0.5 * (a + b) * vol;
    });
  }
  require(used > 0, "lq_norm: empty region");
  return total;
}

double lq_norm(const SpaceTimeField& f, double q, const Box& space_region,
               double time_lo, double time_hi) {
  const double integral = lq_integral(f, q, space_region, time_lo, time_hi);
  return integral == kInf ? kInf : std::pow(integral, 1.0 / q);
}

WeakFormResult weak_form_residual(const SpaceTimeField& v,
                                  const TestFunction& phi, double p) {
  require(p >= 2.0, "weak_form_residual: p must be >= 2");
  require(phi.nonnegative, "weak_form_residual: phi must be nonnegative");
  require(phi.has_time, "weak_form_residual: phi needs a time bump");
  require(phi.strictly_inside(v.stgrid),
          "weak_form_residual: phi support must be strictly inside the cylinder");
  const Grid& g = v.stgrid.space;
  require(phi.dim == g.dim, "weak_form_residual: phi dimension mismatch");
  const CellStencil st(g);
  const double dt = v.stgrid.dt();
  const double vol = g.cell_volume() * dt;
  TestFunction unit = phi;
  unit.amplitude = 1.0;

  const Box supp = phi.support();
  double sum = 0.0;
  double abs_phi_t = 0.0, abs_grad_phi = 0.0;
  double vmax = 0.0, gmax = 0.0;
  for (int k = 0; k < v.stgrid.time_steps; ++k) {
    const double tc = v.stgrid.slice_time(k) + 0.5 * dt;
    if (tc < phi.t_center - phi.t_halfwidth || tc > phi.t_center + phi.t_halfwidth)
      continue;
    const auto& lo = v.slice(k).values;
    const auto& hi = v.slice(k + 1).values;
    g.for_each_cell([&](std::int64_t, const std::array<int, 3>& mc) {
      const Point xc = g.cell_center(mc);
      if (!supp.contains(xc, g.dim)) return;
      const std::int64_t base = g.node_index(mc);
      double vbar = 0.0;
      for (int c = 0; c < st.corners; ++c) {
        const double a = lo[static_cast<std::size_t>(base + st.offset[c])];
        const double b = hi[static_cast<std::size_t>(base + st.offset[c])];
        require(a != kInf && b != kInf,
                "weak_form_residual: +inf sample inside the test support");
        vbar += a + b;
      }
      vbar /= 2 * st.corners;
      const auto ga = st.gradient(lo, base);
      const auto gb = st.gradient(hi, base);
      std::array<double, 3> grad{0, 0, 0};
      double g2 = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        grad[a] = 0.5 * (ga[a] + gb[a]);
        g2 += grad[a] * grad[a];
      }
      const double w = degenerate_weight(g2, p);
      const double pt = unit.time_derivative(xc, tc);
      const Point pg = unit.space_gradient(xc, tc);
      double flux_dot = 0.0;
      for (int a = 0; a < g.dim; ++a) flux_dot += w * grad[a] * pg[a];
      sum += vol * (-vbar * pt + flux_dot);

      abs_phi_t += vol * std::abs(pt);
      double pg2 = 0.0;
      for (int a = 0; a < g.dim; ++a) pg2 += pg[a] * pg[a];
      abs_grad_phi += vol * std::sqrt(pg2);
      vmax = std::max(vmax, std::abs(vbar));
      gmax = std::max(gmax, std::sqrt(g2));
    });
  }
  WeakFormResult res;
  res.value = phi.amplitude * sum;
  // First-order consistency estimate for an exactly sampled supersolution.
  const double scale = g.max_spacing() + dt;
  res.tol_bound = phi.amplitude * scale *
                  (vmax * abs_phi_t + p * std::pow(std::max(gmax, 1.0), p - 1.0) *
                                          abs_grad_phi);
  return res;
}

ScalarField truncate(const ScalarField& f, double k) {
  ScalarField out(f.grid);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    out.values[i] = std::min(f.values[i], k);
  out.extended = false;
  return out;
}

SpaceTimeField truncate(const SpaceTimeField& f, double k) {
  SpaceTimeField out(f.stgrid);
  for (int s = 0; s < f.stgrid.slice_count(); ++s)
    out.slice(s) = truncate(f.slice(s), k);
  out.extended = false;
  return out;
}

bool TestFunction::strictly_inside(const Grid& g) const {
  for (int a = 0; a < g.dim; ++a) {
    if (center[a] - halfwidth[a] <= g.origin[a]) return false;
    if (center[a] + halfwidth[a] >= g.origin[a] + g.extent[a]) return false;
  }
  return true;
}

bool TestFunction::strictly_inside(const SpaceTimeGrid& g) const {
  if (!has_time) return false;
  if (t_center - t_halfwidth <= g.t0) return false;
  if (t_center + t_halfwidth >= g.t1) return false;
  return strictly_inside(g.space);
}

}  // namespace psuper

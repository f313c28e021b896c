#include "psuper/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "psuper/parallel.hpp"

namespace psuper {

namespace {

/// Canonical parabola evaluation shared (by contract) with the brute-force
/// oracle: candidate value = f(y) + ((x-y) h)^2 * (1/(2 eps)), with x-y the
/// integer node offset. Bitwise agreement relies on this expression tree.
inline double parab_value(double fy, std::int64_t d, double h, double inv2eps) {
  const double dx = static_cast<double>(d) * h;
  return fy + dx * dx * inv2eps;
}

/// Lower envelope of parabolas along one line (Felzenszwalb-Huttenlocher
/// pass). +inf entries never win and are skipped as candidates.
void envelope_line(std::vector<double>& line, double h, double inv2eps,
                   std::vector<int>& hull, std::vector<double>& breaks,
                   std::vector<double>& out) {
  const int m = static_cast<int>(line.size());
  out.resize(line.size());
  const double c = h * h * inv2eps;  // curvature in integer-x units
  hull.clear();
  breaks.clear();
  for (int q = 0; q < m; ++q) {
    if (line[q] == kInf) continue;
    const double fq = line[q] + c * q * q;
    double s = 0.0;
    while (!hull.empty()) {
      const int r = hull.back();
      const double fr = line[r] + c * r * r;
      s = (fq - fr) / (2.0 * c * (q - r));
      if (!hull.empty() && s <= breaks.back()) {
        hull.pop_back();
        breaks.pop_back();
      } else {
        break;
      }
    }
    if (hull.empty()) {
      hull.push_back(q);
      breaks.push_back(-kInf);
    } else {
      hull.push_back(q);
      breaks.push_back(s);
    }
  }
  if (hull.empty()) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  std::size_t j = 0;
  for (int x = 0; x < m; ++x) {
    while (j + 1 < hull.size() && breaks[j + 1] < static_cast<double>(x)) ++j;
    const int y = hull[j];
    out[static_cast<std::size_t>(x)] = parab_value(line[y], x - y, h, inv2eps);
  }
}

/// Applies the pass to every line of `values` along a strided axis.
void envelope_axis(std::vector<double>& values, std::int64_t line_count,
                   std::int64_t line_len, std::int64_t stride,
                   const std::function<std::int64_t(std::int64_t)>& line_base,
                   double h, double inv2eps) {
  parallel_for(0, line_count, [&](std::int64_t li) {
    std::vector<double> line(static_cast<std::size_t>(line_len));
    std::vector<double> out;
    std::vector<int> hull;
    std::vector<double> breaks;
    const std::int64_t base = line_base(li);
    for (std::int64_t k = 0; k < line_len; ++k)
      line[static_cast<std::size_t>(k)] =
          values[static_cast<std::size_t>(base + k * stride)];
    envelope_line(line, h, inv2eps, hull, breaks, out);
    for (std::int64_t k = 0; k < line_len; ++k)
      values[static_cast<std::size_t>(base + k * stride)] =
          out[static_cast<std::size_t>(k)];
  });
}

void envelope_spatial_axes(std::vector<double>& values, const Grid& g,
                           double inv2eps) {
  std::array<std::int64_t, 3> stride{0, 0, 0};
  stride[g.dim - 1] = 1;
  for (int a = g.dim - 2; a >= 0; --a)
    stride[a] = stride[a + 1] * g.nodes_along(a + 1);
  for (int a = 0; a < g.dim; ++a) {
    const std::int64_t len = g.nodes_along(a);
    const std::int64_t lines = g.node_count() / len;
    // Line bases: all nodes with index 0 along axis a.
    std::vector<std::int64_t> bases;
    bases.reserve(static_cast<std::size_t>(lines));
    g.for_each_node([&](std::int64_t idx, const std::array<int, 3>& mi) {
      if (mi[a] == 0) bases.push_back(idx);
    });
    envelope_axis(
        values, lines, len, stride[a],
        [&](std::int64_t li) { return bases[static_cast<std::size_t>(li)]; },
        g.h[a], inv2eps);
  }
}

double finite_sup(const std::vector<double>& v) {
  double m = -kInf;
  bool any = false;
  for (double x : v)
    if (x != kInf) {
      m = std::max(m, x);
      any = true;
    }
  require(any, "inf_convolution: input has no finite values");
  return m;
}

double boundary_distance(const Grid& g, const Point& x) {
  double d = kInf;
  for (int a = 0; a < g.dim; ++a) {
    d = std::min(d, x[a] - g.origin[a]);
    d = std::min(d, g.origin[a] + g.extent[a] - x[a]);
  }
  return d;
}

}  // namespace

EnvelopeResult<ScalarField> inf_convolution(const ScalarField& f, double epsilon) {
  require(epsilon > 0.0, "inf_convolution: epsilon must be positive");
  f.validate();  // rules out -inf (unbounded below) and NaN
  EnvelopeResult<ScalarField> res;
  res.epsilon = epsilon;
  res.field = f;
  const double L = finite_sup(f.values);
  res.shrink_margin = std::sqrt(2.0 * std::max(L, 0.0) * epsilon);
  const double inv2eps = 1.0 / (2.0 * epsilon);
  envelope_spatial_axes(res.field.values, f.grid, inv2eps);
  res.field.extended = res.field.has_infinite();
  res.valid_mask.assign(f.values.size(), 0);
  f.grid.for_each_node([&](std::int64_t idx, const std::array<int, 3>& mi) {
    if (boundary_distance(f.grid, f.grid.node_coords(mi)) > res.shrink_margin)
      res.valid_mask[static_cast<std::size_t>(idx)] = 1;
  });
  return res;
}

EnvelopeResult<SpaceTimeField> inf_convolution(const SpaceTimeField& f,
                                               double epsilon) {
  require(epsilon > 0.0, "inf_convolution: epsilon must be positive");
  f.validate();
  const Grid& g = f.stgrid.space;
  const std::int64_t per = g.node_count();
  const int slices = f.stgrid.slice_count();
  // Flatten to (slice-major, node-minor) for the axis passes.
  std::vector<double> values(static_cast<std::size_t>(per) * slices);
  for (int k = 0; k < slices; ++k)
    std::copy(f.slice(k).values.begin(), f.slice(k).values.end(),
              values.begin() + static_cast<std::size_t>(k) * per);
  const double L = finite_sup(values);
  const double inv2eps = 1.0 / (2.0 * epsilon);

  // Spatial passes within each slice, then the time pass across slices
  // (the quadratic penalty is separable across all axes including time).
  for (int k = 0; k < slices; ++k) {
    std::vector<double> slice(values.begin() + static_cast<std::size_t>(k) * per,
                              values.begin() + static_cast<std::size_t>(k + 1) * per);
    envelope_spatial_axes(slice, g, inv2eps);
    std::copy(slice.begin(), slice.end(),
              values.begin() + static_cast<std::size_t>(k) * per);
  }
  envelope_axis(
      values, per, slices, per, [](std::int64_t li) { return li; },
      f.stgrid.dt(), inv2eps);

  EnvelopeResult<SpaceTimeField> res;
  res.epsilon = epsilon;
  res.shrink_margin = std::sqrt(2.0 * std::max(L, 0.0) * epsilon);
  res.field = SpaceTimeField(f.stgrid);
  for (int k = 0; k < slices; ++k) {
    std::copy(values.begin() + static_cast<std::size_t>(k) * per,
              values.begin() + static_cast<std::size_t>(k + 1) * per,
              res.field.slice(k).values.begin());
    res.field.slice(k).extended = res.field.slice(k).has_infinite();
    res.field.extended = res.field.extended || res.field.slice(k).extended;
  }
  res.valid_mask.assign(values.size(), 0);
  for (int k = 0; k < slices; ++k) {
    const double t = f.stgrid.slice_time(k);
    const double tdist = std::min(t - f.stgrid.t0, f.stgrid.t1 - t);
    g.for_each_node([&](std::int64_t idx, const std::array<int, 3>& mi) {
      const double d =
          std::min(boundary_distance(g, g.node_coords(mi)), tdist);
      if (d > res.shrink_margin)
        res.valid_mask[static_cast<std::size_t>(k) * per +
                       static_cast<std::size_t>(idx)] = 1;
    });
  }
  return res;
}

SpaceTimeField time_mollify(const SpaceTimeField& u, double sigma) {
  require(sigma > 0.0, "time_mollify: sigma must be positive");
  u.validate();
  require(!u.extended, "time_mollify: field must be finite");
  const double dt = u.stgrid.dt();
  const double decay = std::exp(-dt / sigma);
  const double gain = 1.0 - decay;
  SpaceTimeField out(u.stgrid, 0.0);
  const std::int64_t per = u.stgrid.space.node_count();
  for (int k = 0; k + 1 < u.stgrid.slice_count(); ++k) {
    const auto& prev = out.slice(k).values;
    const auto& ua = u.slice(k).values;
    const auto& ub = u.slice(k + 1).values;
    auto& next = out.slice(k + 1).values;
    for (std::int64_t i = 0; i < per; ++i) {
      const std::size_t s = static_cast<std::size_t>(i);
      next[s] = decay * prev[s] + gain * 0.5 * (ua[s] + ub[s]);
    }
  }
  return out;
}

namespace {

struct NullLookup {
  const std::vector<std::uint8_t>& mask;
  std::size_t offset;
  bool operator()(std::int64_t i) const {
    return mask[offset + static_cast<std::size_t>(i)] != 0;
  }
};

/// Minimum over non-null nodes within the smallest Chebyshev radius >= 1
/// that contains any (searching radius 1 then 2; the precondition promises
/// a non-null neighbor within 2 cells).
double repaired_value(const ScalarField& f, const std::array<int, 3>& mi,
                      const NullLookup& is_null) {
  const Grid& g = f.grid;
  for (int radius = 1; radius <= 2; ++radius) {
    double best = kInf;
    bool found = false;
    std::array<int, 3> nb{0, 0, 0};
    const int l0 = std::max(0, mi[0] - radius), h0 = std::min(g.cells[0], mi[0] + radius);
    const int l1 = g.dim > 1 ? std::max(0, mi[1] - radius) : 0;
    const int h1 = g.dim > 1 ? std::min(g.cells[1], mi[1] + radius) : 0;
    const int l2 = g.dim > 2 ? std::max(0, mi[2] - radius) : 0;
    const int h2 = g.dim > 2 ? std::min(g.cells[2], mi[2] + radius) : 0;
    for (nb[0] = l0; nb[0] <= h0; ++nb[0])
      for (nb[1] = l1; nb[1] <= h1; ++nb[1])
        for (nb[2] = l2; nb[2] <= h2; ++nb[2]) {
          const std::int64_t j = g.node_index(nb);
          if (is_null(j)) continue;
          found = true;
          best = std::min(best, f[j]);
        }
    if (found) return best;
  }
  throw Error("ess_liminf_representative: a node's full neighborhood is null (ill-posed)");
}

}  // namespace

ScalarField ess_liminf_representative(const ScalarField& f,
                                      const std::vector<std::uint8_t>& null_mask) {
  require(null_mask.size() == f.values.size(),
          "ess_liminf_representative: mask size mismatch");
  ScalarField out = f;
  const NullLookup is_null{null_mask, 0};
  f.grid.for_each_node([&](std::int64_t idx, const std::array<int, 3>& mi) {
    if (is_null(idx)) out[idx] = repaired_value(f, mi, is_null);
  });
  return out;
}

SpaceTimeField ess_liminf_representative(const SpaceTimeField& f,
                                         const std::vector<std::uint8_t>& null_mask,
                                         bool past_only) {
  const std::int64_t per = f.stgrid.space.node_count();
  require(null_mask.size() ==
              static_cast<std::size_t>(per) * f.stgrid.slice_count(),
          "ess_liminf_representative: mask size mismatch");
  const Grid& g = f.stgrid.space;
  SpaceTimeField out = f;
  for (int k = 0; k < f.stgrid.slice_count(); ++k) {
    const std::size_t koff = static_cast<std::size_t>(k) * per;
    g.for_each_node([&](std::int64_t idx, const std::array<int, 3>& mi) {
      const bool self_null = null_mask[koff + static_cast<std::size_t>(idx)] != 0;
      if (!past_only && !self_null) return;  // neighborhood shrinks to the node
      if (past_only && k == 0) {
        if (self_null)
          throw Error(
              "ess_liminf_representative: initial slice has no past (ill-posed)");
        return;
      }
      // Expanding space-time Chebyshev neighborhood of non-null nodes;
      // past_only restricts to strictly earlier slices.
      for (int radius = 1; radius <= 2; ++radius) {
        double best = kInf;
        bool found = false;
        const int kfrom = std::max(0, k - radius);
        const int kto = past_only ? k - 1
                                  : std::min(f.stgrid.slice_count() - 1, k + radius);
        std::array<int, 3> nb{0, 0, 0};
        const int l0 = std::max(0, mi[0] - radius), h0 = std::min(g.cells[0], mi[0] + radius);
        const int l1 = g.dim > 1 ? std::max(0, mi[1] - radius) : 0;
        const int h1 = g.dim > 1 ? std::min(g.cells[1], mi[1] + radius) : 0;
        const int l2 = g.dim > 2 ? std::max(0, mi[2] - radius) : 0;
        const int h2 = g.dim > 2 ? std::min(g.cells[2], mi[2] + radius) : 0;
        for (int kk = kfrom; kk <= kto; ++kk) {
          const std::size_t off = static_cast<std::size_t>(kk) * per;
          for (nb[0] = l0; nb[0] <= h0; ++nb[0])
            for (nb[1] = l1; nb[1] <= h1; ++nb[1])
              for (nb[2] = l2; nb[2] <= h2; ++nb[2]) {
                if (!past_only && kk == k && nb == mi) continue;
                const std::int64_t j = g.node_index(nb);
                if (null_mask[off + static_cast<std::size_t>(j)] != 0) continue;
                found = true;
                best = std::min(best, f.slice(kk)[j]);
              }
        }
        if (found) {
          out.slice(k)[idx] = best;
          return;
        }
      }
      throw Error(
          "ess_liminf_representative: a node's full neighborhood is null (ill-posed)");
    });
  }
  return out;
}

}  // namespace psuper

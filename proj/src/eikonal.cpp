#include <algorithm>
#include <cmath>
#include <limits>

#include "stablab/errors.hpp"
#include "stablab/grid.hpp"

namespace stablab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Coordinate difference x − s, taken along the shortest winding on periodic axes.
Vec wrapped_delta(const MetricChart& chart, const Vec& x, const Vec& s) {
  Vec d{};
  for (int a = 0; a < kDim; ++a) {
    d[a] = x[a] - s[a];
    if (chart.axes[a].kind == AxisKind::Periodic) {
      const double L = chart.axes[a].length();
      d[a] -= L * std::round(d[a] / L);
    }
  }
  return d;
}

// Godunov update for ((d − U0)/a0)² + ((d − U1)/a1)² = 1.
double godunov(double u0, double a0, double u1, double a1) {
  if (u0 > u1) {
    std::swap(u0, u1);
    std::swap(a0, a1);
  }
  if (u0 == kInf) return kInf;
  const double one_sided = u0 + a0;
  if (one_sided <= u1) return one_sided;
  const double al = 1.0 / (a0 * a0);
  const double be = 1.0 / (a1 * a1);
  const double disc = (al + be) - al * be * (u0 - u1) * (u0 - u1);
  if (disc < 0.0) return one_sided;
  return ((al * u0 + be * u1) + std::sqrt(disc)) / (al + be);
}

}  // namespace

Field geodesic_distance(const StructuredGrid& grid, const Vec& source,
                        const EikonalOptions& options) {
  static_assert(kDim == 2, "sweep orders are written for two axes");
  if (!grid.diagonal_metric())
    throw ConfigError("geodesic_distance needs a diagonal metric on chart '" +
                      grid.chart().name + "'");
  const MetricChart& chart = grid.chart();
  for (int a = 0; a < kDim; ++a) {
    const Axis& ax = chart.axes[a];
    if (ax.kind != AxisKind::Periodic && (source[a] < ax.lo || source[a] > ax.hi))
      throw ConfigError("geodesic source lies outside chart '" + chart.name + "'");
  }

  const std::size_t n = grid.size();
  const Vec& h = grid.spacing();
  Field d(n, kInf);
  std::vector<std::uint8_t> frozen(n, 0);

  // A source on a pole of a polar axis: the first ring is at exact meridian distance.
  int pole_axis = -1;
  for (int a = 0; a < kDim; ++a) {
    const Axis& ax = chart.axes[a];
    if (ax.kind == AxisKind::Polar && (source[a] == ax.lo || source[a] == ax.hi)) pole_axis = a;
  }

  for (std::size_t p = 0; p < n; ++p) {
    const Vec x = grid.coord(p);
    const Vec dx = wrapped_delta(chart, x, source);
    if (pole_axis >= 0) {
      const auto ij = grid.multi_index(p);
      const int ring = source[pole_axis] == chart.axes[pole_axis].lo
                           ? ij[pole_axis]
                           : grid.nodes()[pole_axis] - 1 - ij[pole_axis];
      if (ring == 0) {
        Vec mid = source;
        mid[pole_axis] = 0.5 * (source[pole_axis] + x[pole_axis]);
        d[p] = std::sqrt(metric_at(chart, mid)[pole_axis][pole_axis]) * std::abs(dx[pole_axis]);
        frozen[p] = 1;
      }
      continue;
    }
    bool near = true;
    for (int a = 0; a < kDim; ++a) near = near && std::abs(dx[a]) <= 2.0 * h[a] * (1.0 + 1e-9);
    if (!near) continue;
    // Metric distance with g frozen at the midpoint of the short chord.
    Vec mid{};
    for (int a = 0; a < kDim; ++a) mid[a] = source[a] + 0.5 * dx[a];
    const Mat g = metric_at(chart, mid);
    double s = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) s += g[i][j] * dx[i] * dx[j];
    d[p] = std::sqrt(std::max(0.0, s));
    frozen[p] = 1;
  }

  // Metric length of one step along each axis at each node.
  std::vector<Vec> step(n);
  for (std::size_t p = 0; p < n; ++p)
    for (int a = 0; a < kDim; ++a) step[p][a] = std::sqrt(grid.metric(p)[a][a]) * h[a];

  const auto upwind = [&](std::size_t p, int a) {
    double u = kInf;
    if (auto q = grid.neighbor(p, a, +1)) u = std::min(u, d[*q]);
    if (auto q = grid.neighbor(p, a, -1)) u = std::min(u, d[*q]);
    return u;
  };

  const int n0 = grid.nodes()[0];
  const int n1 = grid.nodes()[1];
  for (int round = 0; round < options.max_rounds; ++round) {
    double change = 0.0;
    for (int order = 0; order < 8; ++order) {
      const bool swap_axes = order >= 4;
      const bool rev0 = order & 1;
      const bool rev1 = order & 2;
      const int outer_n = swap_axes ? n1 : n0;
      const int inner_n = swap_axes ? n0 : n1;
      for (int oi = 0; oi < outer_n; ++oi) {
        for (int ii = 0; ii < inner_n; ++ii) {
          int i0 = swap_axes ? ii : oi;
          int i1 = swap_axes ? oi : ii;
          if (rev0) i0 = n0 - 1 - i0;
          if (rev1) i1 = n1 - 1 - i1;
          const std::size_t p = grid.index({i0, i1});
          if (frozen[p]) continue;
          const double cand = godunov(upwind(p, 0), step[p][0], upwind(p, 1), step[p][1]);
          if (cand < d[p]) {
            change = std::max(change, d[p] == kInf ? kInf : d[p] - cand);
            d[p] = cand;
          }
        }
      }
    }
    if (change <= options.tolerance) return d;
  }
  throw NonConvergence("eikonal sweeps did not settle within " +
                       std::to_string(options.max_rounds) + " rounds");
}

}  // namespace stablab

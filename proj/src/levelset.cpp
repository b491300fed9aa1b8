#include "stablab/levelset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "stablab/errors.hpp"

namespace stablab {

namespace {

// ---- cubic splines ----------------------------------------------------------

void solve_tridiagonal(const std::vector<double>& a, std::vector<double> b,
                       const std::vector<double>& c, std::vector<double>& r) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = a[i] / b[i - 1];
    b[i] -= m * c[i - 1];
    r[i] -= m * r[i - 1];
  }
  r[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) r[i] = (r[i] - c[i] * r[i + 1]) / b[i];
}

// Second derivatives at the knots. Periodic splines take y.back() == y.front().
std::vector<double> spline_moments(const std::vector<double>& t, const std::vector<double>& y,
                                   bool periodic) {
  const std::size_t n = t.size() - 1;  // intervals
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = t[i + 1] - t[i];
  std::vector<double> m(n + 1, 0.0);
  if (!periodic) {
    if (n < 2) return m;
    const std::size_t k = n - 1;
    std::vector<double> a(k), b(k), c(k), r(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      a[j] = h[i - 1];
      b[j] = 2.0 * (h[i - 1] + h[i]);
      c[j] = h[i];
      r[j] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    solve_tridiagonal(a, b, c, r);
    for (std::size_t j = 0; j < k; ++j) m[j + 1] = r[j];
    return m;
  }
  // Cyclic system via Sherman–Morrison.
  std::vector<double> a(n), b(n), c(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t im = (i + n - 1) % n;
    a[i] = h[im];
    b[i] = 2.0 * (h[im] + h[i]);
    c[i] = h[i];
    r[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[(i + n - 1) % n]) / h[im]);
  }
  const double alpha = c[n - 1];  // A[n−1][0]
  const double beta = a[0];       // A[0][n−1]
  const double gamma = -b[0];
  std::vector<double> bb = b;
  bb[0] -= gamma;
  bb[n - 1] -= alpha * beta / gamma;
  std::vector<double> x = r;
  solve_tridiagonal(a, bb, c, x);
  std::vector<double> z(n, 0.0);
  z[0] = gamma;
  z[n - 1] = alpha;
  solve_tridiagonal(a, bb, c, z);
  const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) m[i] = x[i] - fact * z[i];
  m[n] = m[0];
  return m;
}

double spline_eval(const std::vector<double>& t, const std::vector<double>& y,
                   const std::vector<double>& m, double s) {
  const std::size_t n = t.size() - 1;
  auto it = std::upper_bound(t.begin(), t.end(), s);
  std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
  i = std::min(i, n - 1);
  const double h = t[i + 1] - t[i];
  const double A = (t[i + 1] - s) / h;
  const double B = (s - t[i]) / h;
  return A * y[i] + B * y[i + 1] + ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
}

double metric_length(const MetricChart& chart, const Vec& a, const Vec& b) {
  Vec mid{}, d{};
  for (int k = 0; k < kDim; ++k) {
    mid[k] = 0.5 * (a[k] + b[k]);
    d[k] = b[k] - a[k];
  }
  const Mat g = metric_at(chart, mid);
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) s += g[i][j] * d[i] * d[j];
  return std::sqrt(s);
}

Vec unwrap_near(const MetricChart& chart, const Vec& x, const Vec& ref) {
  Vec y = x;
  for (int a = 0; a < kDim; ++a) {
    if (chart.axes[a].kind != AxisKind::Periodic) continue;
    const double L = chart.axes[a].length();
    y[a] -= L * std::round((y[a] - ref[a]) / L);
  }
  return y;
}

double defect_of_polyline(const MetricChart& chart, std::vector<Vec> pts, bool closed,
                          const Vec& shift, double ds) {
  // Drop repeated vertices.
  std::vector<Vec> v;
  for (const Vec& p : pts)
    if (v.empty() || metric_length(chart, v.back(), p) > 1e-13) v.push_back(p);
  if (closed && v.size() > 1) {
    Vec end{};
    for (int a = 0; a < kDim; ++a) end[a] = v.front()[a] + shift[a];
    if (metric_length(chart, v.back(), end) <= 1e-13) v.pop_back();
  }
  if (v.size() < 5)
    throw TooFewVertices("curve has " + std::to_string(v.size()) + " distinct vertices, need 5");

  std::vector<Vec> knots = v;
  if (closed) {
    Vec end{};
    for (int a = 0; a < kDim; ++a) end[a] = v.front()[a] + shift[a];
    knots.push_back(end);
  }
  std::vector<double> s(knots.size(), 0.0);
  for (std::size_t k = 1; k < knots.size(); ++k)
    s[k] = s[k - 1] + metric_length(chart, knots[k - 1], knots[k]);
  const double total = s.back();

  const auto intervals = static_cast<std::size_t>(std::max(4.0, std::round(total / ds)));
  const double step = total / static_cast<double>(intervals);
  std::vector<Vec> res(intervals + 1);
  for (int a = 0; a < kDim; ++a) {
    std::vector<double> y(knots.size());
    // Closed curves: fit the periodic part after removing the linear drift.
    for (std::size_t k = 0; k < knots.size(); ++k)
      y[k] = knots[k][a] - (closed ? shift[a] * s[k] / total : 0.0);
    const std::vector<double> m = spline_moments(s, y, closed);
    for (std::size_t j = 0; j <= intervals; ++j) {
      const double sj = step * static_cast<double>(j);
      res[j][a] = spline_eval(s, y, m, sj) + (closed ? shift[a] * sj / total : 0.0);
    }
  }

  const auto point = [&](long j) {
    if (!closed) return res[static_cast<std::size_t>(j)];
    const long n = static_cast<long>(intervals);
    long q = j % n;
    long wraps = (j - q) / n;
    if (q < 0) {
      q += n;
      wraps -= 1;
    }
    Vec p = res[static_cast<std::size_t>(q)];
    for (int a = 0; a < kDim; ++a) p[a] += static_cast<double>(wraps) * shift[a];
    return p;
  };
  const long first = closed ? 0 : 1;
  const long last = closed ? static_cast<long>(intervals) - 1 : static_cast<long>(intervals) - 1;
  double worst = 0.0;
  for (long j = first; j <= last; ++j) {
    const Vec pm = point(j - 1), p0 = point(j), pp = point(j + 1);
    Christoffel gamma{};
    try {
      gamma = chart.analytic_christoffel ? chart.analytic_christoffel(p0) : christoffel(chart, p0);
    } catch (const EdgeProximity&) {
      continue;
    }
    Vec acc{}, vel{};
    for (int a = 0; a < kDim; ++a) {
      acc[a] = (pp[a] - 2.0 * p0[a] + pm[a]) / (step * step);
      vel[a] = (pp[a] - pm[a]) / (2.0 * step);
    }
    for (int k = 0; k < kDim; ++k)
      for (int i = 0; i < kDim; ++i)
        for (int l = 0; l < kDim; ++l) acc[k] += gamma[k][i][l] * vel[i] * vel[l];
    const Mat g = metric_at(chart, p0);
    double n2 = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int l = 0; l < kDim; ++l) n2 += g[i][l] * acc[i] * acc[l];
    worst = std::max(worst, std::sqrt(n2));
  }
  return worst;
}

}  // namespace

void LevelCurve::write_csv(std::ostream& os, const MetricChart& chart) const {
  os << "s,x0,x1,grad_norm\n";
  double s = 0.0;
  char buf[192];
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    if (k > 0) s += metric_length(chart, vertices[k - 1], vertices[k]);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s, vertices[k][0],
                  vertices[k][1], grad_norm[k]);
    os << buf;
  }
}

std::vector<LevelCurve> extract_level_set(const StructuredGrid& grid, std::span<const double> u,
                                          double c, double grad_floor) {
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  if (c < *lo || c > *hi)
    throw EmptyLevelSet("level " + std::to_string(c) + " outside [" + std::to_string(*lo) +
                        ", " + std::to_string(*hi) + "]");
  const Field gn = grad_norm_field(grid, u);
  if (grad_floor < 0.0) grad_floor = 1e-2 * *std::max_element(gn.begin(), gn.end());
  const MetricChart& chart = grid.chart();

  // Edge (p, a) joins node p to its +1 face partner along axis a.
  const auto edge_id = [](std::size_t p, int a) { return p * kDim + static_cast<std::size_t>(a); };
  struct Crossing {
    Vec x;
    double grad;
  };
  const auto crossing = [&](std::size_t eid) {
    const std::size_t p = eid / kDim;
    const int a = static_cast<int>(eid % kDim);
    const std::size_t q = *grid.face_partner(p, a, +1);
    const double t = (c - u[p]) / (u[q] - u[p]);
    Crossing cr;
    cr.x = grid.coord(p);
    cr.x[a] += t * grid.spacing()[a];
    cr.grad = (1.0 - t) * gn[p] + t * gn[q];
    return cr;
  };

  std::vector<std::array<std::size_t, 2>> segments;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto q10 = grid.face_partner(p, 0, +1);
    const auto q01 = grid.face_partner(p, 1, +1);
    if (!q10 || !q01) continue;
    const std::size_t q11 = *grid.face_partner(*q10, 1, +1);
    const std::array<std::size_t, 4> corner{p, *q10, q11, *q01};  // cyclic order
    if (std::min({gn[p], gn[*q10], gn[q11], gn[*q01]}) <= grad_floor) continue;
    std::array<bool, 4> above{};
    for (int k = 0; k < 4; ++k) above[k] = u[corner[k]] > c;
    // Edge k joins corner k and corner k + 1.
    const std::array<std::size_t, 4> edges{edge_id(p, 0), edge_id(*q10, 1), edge_id(*q01, 0),
                                           edge_id(p, 1)};
    std::array<int, 4> cut{};
    int n_cut = 0;
    for (int k = 0; k < 4; ++k)
      if (above[k] != above[(k + 1) % 4]) cut[n_cut++] = k;
    if (n_cut == 2) {
      segments.push_back({edges[cut[0]], edges[cut[1]]});
    } else if (n_cut == 4) {
      const double centre = 0.25 * (u[p] + u[*q10] + u[q11] + u[*q01]);
      if ((centre > c) == above[0]) {
        segments.push_back({edges[0], edges[1]});
        segments.push_back({edges[2], edges[3]});
      } else {
        segments.push_back({edges[3], edges[0]});
        segments.push_back({edges[1], edges[2]});
      }
    }
  }

  std::unordered_map<std::size_t, std::vector<std::size_t>> at_edge;
  for (std::size_t s = 0; s < segments.size(); ++s)
    for (std::size_t e : segments[s]) at_edge[e].push_back(s);

  std::vector<bool> used(segments.size(), false);
  std::vector<LevelCurve> curves;
  const auto walk = [&](std::size_t start_seg, std::size_t start_edge) {
    LevelCurve curve;
    curve.level = c;
    curve.spacing = grid.spacing_scale();
    std::size_t edge = start_edge;
    std::size_t seg = start_seg;
    Crossing cr = crossing(edge);
    curve.vertices.push_back(cr.x);
    curve.grad_norm.push_back(cr.grad);
    while (true) {
      used[seg] = true;
      edge = segments[seg][0] == edge ? segments[seg][1] : segments[seg][0];
      cr = crossing(edge);
      const Vec x = unwrap_near(chart, cr.x, curve.vertices.back());
      if (edge == start_edge) {
        curve.closed = true;
        for (int a = 0; a < kDim; ++a) curve.closure_shift[a] = x[a] - curve.vertices.front()[a];
        // Snap to an exact period multiple.
        for (int a = 0; a < kDim; ++a)
          if (chart.axes[a].kind == AxisKind::Periodic) {
            const double L = chart.axes[a].length();
            curve.closure_shift[a] = L * std::round(curve.closure_shift[a] / L);
          } else {
            curve.closure_shift[a] = 0.0;
          }
        break;
      }
      curve.vertices.push_back(x);
      curve.grad_norm.push_back(cr.grad);
      std::size_t next = segments.size();
      for (std::size_t s : at_edge[edge])
        if (!used[s]) next = s;
      if (next == segments.size()) break;
      seg = next;
    }
    curves.push_back(std::move(curve));
  };
  // Open chains first, starting from their free ends, then the remaining loops.
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    for (std::size_t e : segments[s])
      if (at_edge[e].size() == 1 && !used[s]) walk(s, e);
  }
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (!used[s]) walk(s, segments[s][0]);
  return curves;
}

double geodesic_defect(const MetricChart& chart, const LevelCurve& curve, double ds) {
  if (!(ds > 0.0)) ds = curve.spacing > 0.0 ? 4.0 * curve.spacing : 0.0;
  if (!(ds > 0.0)) throw ConfigError("geodesic_defect needs a resample spacing");
  return defect_of_polyline(chart, curve.vertices, curve.closed, curve.closure_shift, ds);
}

double geodesic_defect(const MetricChart& chart, const GeodesicPath& path) {
  if (path.samples.empty()) throw TooFewVertices("empty path");
  std::vector<Vec> pts;
  for (const auto& s : path.samples) pts.push_back(s.x);
  const double v = speed(chart, path.samples.front().x, path.samples.front().v);
  return defect_of_polyline(chart, pts, false, Vec{}, v * path.dt);
}

}  // namespace stablab

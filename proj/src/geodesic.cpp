#include "stablab/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "stablab/errors.hpp"

namespace stablab {

namespace {

bool inside(const MetricChart& chart, const Vec& x) {
  for (int a = 0; a < kDim; ++a) {
    const Axis& ax = chart.axes[a];
    if (ax.kind == AxisKind::Periodic) continue;
    if (x[a] < ax.lo || x[a] > ax.hi) return false;
  }
  return true;
}

struct State {
  Vec x;
  Vec v;
};

State rhs(const MetricChart& chart, const State& s) {
  const Christoffel g = chart.analytic_christoffel ? chart.analytic_christoffel(s.x)
                                                   : christoffel(chart, s.x);
  State d{s.v, {}};
  for (int k = 0; k < kDim; ++k) {
    double a = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) a += g[k][i][j] * s.v[i] * s.v[j];
    d.v[k] = -a;
  }
  return d;
}

State axpy(const State& s, double h, const State& d) {
  State r = s;
  for (int a = 0; a < kDim; ++a) {
    r.x[a] += h * d.x[a];
    r.v[a] += h * d.v[a];
  }
  return r;
}

}  // namespace

double speed(const MetricChart& chart, const Vec& x, const Vec& v) {
  const Mat g = metric_at(chart, x);
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) s += g[i][j] * v[i] * v[j];
  return std::sqrt(s);
}

double GeodesicPath::speed_drift(const MetricChart& chart) const {
  if (samples.empty()) return 0.0;
  const double s0 = speed(chart, samples.front().x, samples.front().v);
  double worst = 0.0;
  for (const auto& s : samples)
    worst = std::max(worst, std::abs(speed(chart, s.x, s.v) - s0));
  return worst / std::max(1.0, samples.back().t - samples.front().t);
}

void GeodesicPath::write_csv(std::ostream& os, const MetricChart& c) const {
  os << "t,x0,x1,v0,v1,speed\n";
  char buf[256];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.x[0],
                  s.x[1], s.v[0], s.v[1], speed(c, s.x, s.v));
    os << buf;
  }
}

GeodesicPath integrate_geodesic(const MetricChart& chart, const Vec& x0, const Vec& v0,
                                double T, double dt) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw ConfigError("geodesic needs dt > 0 and T >= 0");
  if (std::all_of(v0.begin(), v0.end(), [](double c) { return c == 0.0; }))
    throw ConfigError("initial velocity must be nonzero");
  if (!inside(chart, x0)) throw ConfigError("initial point lies outside the chart");

  GeodesicPath path;
  path.chart = chart.name;
  const auto steps = static_cast<long>(std::ceil(T / dt - 1e-9));
  path.dt = steps > 0 ? T / static_cast<double>(steps) : dt;
  const double h = path.dt;
  State s{x0, v0};
  path.samples.push_back({0.0, s.x, s.v});
  for (long k = 0; k < steps; ++k) {
    try {
      const State k1 = rhs(chart, s);
      const State k2 = rhs(chart, axpy(s, 0.5 * h, k1));
      const State k3 = rhs(chart, axpy(s, 0.5 * h, k2));
      const State k4 = rhs(chart, axpy(s, h, k3));
      State next = s;
      for (int a = 0; a < kDim; ++a) {
        next.x[a] += h / 6.0 * (k1.x[a] + 2.0 * k2.x[a] + 2.0 * k3.x[a] + k4.x[a]);
        next.v[a] += h / 6.0 * (k1.v[a] + 2.0 * k2.v[a] + 2.0 * k3.v[a] + k4.v[a]);
      }
      if (!inside(chart, next.x)) {
        path.domain_exit = true;
        break;
      }
      s = next;
    } catch (const EdgeProximity&) {
      path.domain_exit = true;
      break;
    } catch (const NonSPDMetric&) {
      path.domain_exit = true;
      break;
    }
    path.samples.push_back({static_cast<double>(k + 1) * h, s.x, s.v});
  }
  return path;
}

}  // namespace stablab

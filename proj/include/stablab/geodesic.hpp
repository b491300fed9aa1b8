#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stablab/metric.hpp"

namespace stablab {

struct GeodesicSample {
  double t = 0.0;
  Vec x{};
  Vec v{};
};

struct GeodesicPath {
  std::string chart;
  double dt = 0.0;
  std::vector<GeodesicSample> samples;
  bool domain_exit = false;  // integration stopped at a non-periodic chart edge

  /// max_t | |γ̇(t)|_g − |γ̇(0)|_g | divided by max(1, elapsed time).
  double speed_drift(const MetricChart& chart) const;
  /// Columns t, x0, x1, v0, v1, speed.
  void write_csv(std::ostream& os, const MetricChart& chart) const;
};

double speed(const MetricChart& chart, const Vec& x, const Vec& v);

/// Classical RK4 for γ̈^k + Γ^k_ij γ̇^i γ̇^j = 0 with analytic Christoffel
/// symbols when the chart has them. Periodic coordinates are left unwrapped.
GeodesicPath integrate_geodesic(const MetricChart& chart, const Vec& x0, const Vec& v0,
                                double T, double dt);

}  // namespace stablab

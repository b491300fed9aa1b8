#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "stablab/geodesic.hpp"
#include "stablab/grid.hpp"

namespace stablab {

/// A connected polyline of {u = c}. Coordinates along periodic axes are
/// unwrapped so consecutive vertices are close.
struct LevelCurve {
  double level = 0.0;
  std::vector<Vec> vertices;
  std::vector<double> grad_norm;  // |∇u| interpolated at each vertex
  bool closed = false;
  /// For closed curves: the vertex after the last one is vertices[0] + closure_shift
  /// (a period vector when the curve winds around a periodic axis).
  Vec closure_shift{};
  double spacing = 0.0;  // metric grid spacing of the source grid

  /// Columns s (metric arclength), x0, x1, grad_norm.
  void write_csv(std::ostream& os, const MetricChart& chart) const;
};

/// Marching squares with linear interpolation on cell edges. Cells whose
/// corners have min |∇u| ≤ grad_floor are skipped; grad_floor < 0 selects the
/// default 1e−2 · max |∇u|. Throws EmptyLevelSet if c lies outside [min u, max u].
std::vector<LevelCurve> extract_level_set(const StructuredGrid& grid, std::span<const double> u,
                                          double c, double grad_floor = -1.0);

/// Largest g-norm of γ̈ + Γ(γ̇, γ̇) along the unit-speed reparametrization,
/// from second differences of a cubic-spline resample at spacing ds
/// (ds ≤ 0 selects 4 × curve.spacing). Equals |geodesic curvature| in 2D.
double geodesic_defect(const MetricChart& chart, const LevelCurve& curve, double ds = 0.0);
/// Same estimate on a sampled geodesic, resampled at its own step length.
double geodesic_defect(const MetricChart& chart, const GeodesicPath& path);

}  // namespace stablab

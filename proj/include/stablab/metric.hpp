#pragma once

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace stablab {

// Pointwise Riemannian tensor calculus on coordinate charts. Everything here is
// written with loops over kDim; only the shipped charts fix kDim = 2.

inline constexpr int kDim = 2;
using Vec = std::array<double, kDim>;
using Mat = std::array<Vec, kDim>;
/// Christoffel symbols of the second kind, indexed [k][i][j] = Γ^k_ij.
using Christoffel = std::array<Mat, kDim>;

enum class AxisKind {
  Bounded,   // closed interval; truncation edges of a noncompact manifold
  Periodic,  // [lo, hi) with hi - lo the period
  Polar,     // closed interval whose endpoints are coordinate poles (metric degenerates)
};

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  AxisKind kind = AxisKind::Bounded;

  double length() const { return hi - lo; }
};

enum class CurvatureSign { Flat, Positive, Unknown };

struct MetricChart {
  std::string name;
  std::array<Axis, kDim> axes;
  std::function<Mat(const Vec&)> metric;
  // Optional closed forms, used as oracles and by grid-level evaluations.
  std::function<Christoffel(const Vec&)> analytic_christoffel;
  std::function<Mat(const Vec&)> analytic_ricci;
  CurvatureSign curvature = CurvatureSign::Unknown;

  bool periodic(int axis) const { return axes[axis].kind == AxisKind::Periodic; }
  /// Largest axis length; sets the default finite-difference step.
  double extent() const;
  /// True when no axis is a truncation edge (torus, full sphere).
  bool compact() const;
};

enum class Variance { Covariant, Contravariant };

struct PointVector {
  Vec components{};  // contravariant
};

struct PointCovector {
  Vec components{};
};

/// A two-tensor whose indices share one variance.
struct PointTwoTensor {
  Mat components{};
  Variance variance = Variance::Covariant;
};

/// A smooth function on the chart. The exact gradient is optional; when it is
/// missing first derivatives fall back to central differences.
struct ScalarFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // partials ∂_i φ
};

/// Contravariant vector field X^i(x).
using VectorFunction = std::function<Vec(const Vec&)>;

double default_step(const MetricChart& chart);

Mat metric_at(const MetricChart& chart, const Vec& x);
double sqrt_det(const Mat& g);
Mat inverse(const Mat& g);
Mat inverse_metric(const MetricChart& chart, const Vec& x);

/// Throws EdgeProximity if a stencil of the given reach leaves the chart along
/// a non-periodic axis.
void check_reach(const MetricChart& chart, const Vec& x, double reach);

Christoffel christoffel(const MetricChart& chart, const Vec& x, double h = 0.0);

/// Partials ∂_i φ (exact when available).
Vec partials(const ScalarFunction& f, const Vec& x, double h);
PointVector grad(const MetricChart& chart, const ScalarFunction& f, const Vec& x,
                 double h = 0.0);
double grad_norm(const MetricChart& chart, const ScalarFunction& f, const Vec& x,
                 double h = 0.0);

double divergence(const MetricChart& chart, const VectorFunction& field,
                  const Vec& x, double h = 0.0);
double laplace_beltrami(const MetricChart& chart, const ScalarFunction& f,
                        const Vec& x, double h = 0.0);

PointTwoTensor hessian(const MetricChart& chart, const ScalarFunction& f,
                       const Vec& x, double h = 0.0);
double hessian_norm_sq(const MetricChart& chart, const ScalarFunction& f,
                       const Vec& x, double h = 0.0);

PointTwoTensor ricci(const MetricChart& chart, const Vec& x, double h = 0.0);

/// ½Δ|∇φ|² − |H_φ|² − ⟨∇Δφ, ∇φ⟩ − Ric(∇φ, ∇φ).
double bochner_residual(const MetricChart& chart, const ScalarFunction& f,
                        const Vec& x, double h = 0.0);

/// |H_φ|² − |∇|∇φ||²; throws BelowGradientFloor where |∇φ| ≤ grad_floor.
double kato_gap(const MetricChart& chart, const ScalarFunction& f, const Vec& x,
                double grad_floor, double h = 0.0);

/// max_k |det(∇(∇φ)^k, ∇φ)| / |∇φ|² using the covariant derivative of ∇φ and
/// the Riemannian area form; zero iff every ∇(∇φ)^k is parallel to ∇φ.
double parallelism_defect(const MetricChart& chart, const ScalarFunction& f,
                          const Vec& x, double grad_floor, double h = 0.0);

// Norms with indices raised by g^{ij}.
double inner(const Mat& g, const PointVector& a, const PointVector& b);
double norm(const Mat& g, const PointVector& a);
double norm_sq(const Mat& g_inv, const PointCovector& w);
double norm_sq(const Mat& g, const Mat& g_inv, const PointTwoTensor& t);
/// T(a, a) for a covariant two-tensor.
double contract(const PointTwoTensor& t, const PointVector& a);

// ---- chart registry ------------------------------------------------------

struct ChartParams {
  double half_width = 10.0;       // flat-plane, flat-cylinder
  double circumference = 6.283185307179586;  // flat-cylinder
  std::array<double, 2> periods{1.0, 1.0};   // flat-torus
  double radius = 1.0;            // sphere
  double band = 0.0;              // sphere: θ ∈ [band, π − band]; 0 = full sphere
  double r_min = 0.5;             // polar-plane
  double r_max = 2.0;
};

MetricChart flat_plane(double half_width);
MetricChart flat_torus(double lx, double ly);
MetricChart flat_cylinder(double half_width, double circumference);
MetricChart sphere(double radius, double band);
MetricChart polar_plane(double r_min, double r_max);

std::vector<std::string> chart_names();
/// Throws ConfigError for unknown names or invalid parameters.
MetricChart make_chart(std::string_view name, const ChartParams& params);

}  // namespace stablab

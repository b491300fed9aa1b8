#include <cmath>
#include <numbers>

#include "stablab/errors.hpp"
#include "stablab/metric.hpp"

namespace stablab {

namespace {

constexpr double kPi = std::numbers::pi;

Mat identity() {
  Mat m{};
  for (int i = 0; i < kDim; ++i) m[i][i] = 1.0;
  return m;
}

void attach_flat(MetricChart& c) {
  c.metric = [](const Vec&) { return identity(); };
  c.analytic_christoffel = [](const Vec&) { return Christoffel{}; };
  c.analytic_ricci = [](const Vec&) { return Mat{}; };
  c.curvature = CurvatureSign::Flat;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

MetricChart flat_plane(double half_width) {
  require(half_width > 0.0, "flat-plane half_width must be positive");
  MetricChart c;
  c.name = "flat-plane";
  c.axes = {Axis{-half_width, half_width, AxisKind::Bounded},
            Axis{-half_width, half_width, AxisKind::Bounded}};
  attach_flat(c);
  return c;
}

MetricChart flat_torus(double lx, double ly) {
  require(lx > 0.0 && ly > 0.0, "flat-torus periods must be positive");
  MetricChart c;
  c.name = "flat-torus";
  c.axes = {Axis{0.0, lx, AxisKind::Periodic}, Axis{0.0, ly, AxisKind::Periodic}};
  attach_flat(c);
  return c;
}

MetricChart flat_cylinder(double half_width, double circumference) {
  require(half_width > 0.0 && circumference > 0.0,
          "flat-cylinder half_width and circumference must be positive");
  MetricChart c;
  c.name = "flat-cylinder";
  c.axes = {Axis{-half_width, half_width, AxisKind::Bounded},
            Axis{0.0, circumference, AxisKind::Periodic}};
  attach_flat(c);
  return c;
}

MetricChart sphere(double radius, double band) {
  require(radius > 0.0, "sphere radius must be positive");
  require(band >= 0.0 && band < 0.5 * kPi, "sphere band must lie in [0, pi/2)");
  MetricChart c;
  c.name = "sphere";
  // (θ, φ): θ colatitude, φ longitude.
  c.axes = {Axis{band, kPi - band, band > 0.0 ? AxisKind::Bounded : AxisKind::Polar},
            Axis{0.0, 2.0 * kPi, AxisKind::Periodic}};
  const double r2 = radius * radius;
  c.metric = [r2](const Vec& x) {
    const double s = std::sin(x[0]);
    Mat g{};
    g[0][0] = r2;
    g[1][1] = r2 * s * s;
    return g;
  };
  c.analytic_christoffel = [](const Vec& x) {
    const double s = std::sin(x[0]);
    const double co = std::cos(x[0]);
    Christoffel gamma{};
    gamma[0][1][1] = -s * co;
    gamma[1][0][1] = gamma[1][1][0] = co / s;
    return gamma;
  };
  // Gaussian curvature 1/r², so Ric = g / r².
  c.analytic_ricci = [](const Vec& x) {
    const double s = std::sin(x[0]);
    Mat ric{};
    ric[0][0] = 1.0;
    ric[1][1] = s * s;
    return ric;
  };
  c.curvature = CurvatureSign::Positive;
  return c;
}

MetricChart polar_plane(double r_min, double r_max) {
  require(r_min > 0.0 && r_max > r_min, "polar-plane needs 0 < r_min < r_max");
  MetricChart c;
  c.name = "polar-plane";
  c.axes = {Axis{r_min, r_max, AxisKind::Bounded}, Axis{0.0, 2.0 * kPi, AxisKind::Periodic}};
  c.metric = [](const Vec& x) {
    Mat g{};
    g[0][0] = 1.0;
    g[1][1] = x[0] * x[0];
    return g;
  };
  c.analytic_christoffel = [](const Vec& x) {
    Christoffel gamma{};
    gamma[0][1][1] = -x[0];
    gamma[1][0][1] = gamma[1][1][0] = 1.0 / x[0];
    return gamma;
  };
  c.analytic_ricci = [](const Vec&) { return Mat{}; };
  c.curvature = CurvatureSign::Flat;
  return c;
}

std::vector<std::string> chart_names() {
  return {"flat-plane", "flat-torus", "flat-cylinder", "sphere", "polar-plane"};
}

MetricChart make_chart(std::string_view name, const ChartParams& p) {
  if (name == "flat-plane") return flat_plane(p.half_width);
  if (name == "flat-torus") return flat_torus(p.periods[0], p.periods[1]);
  if (name == "flat-cylinder") return flat_cylinder(p.half_width, p.circumference);
  if (name == "sphere") return sphere(p.radius, p.band);
  if (name == "polar-plane") return polar_plane(p.r_min, p.r_max);
  throw ConfigError("unknown chart '" + std::string(name) + "'");
}

}  // namespace stablab

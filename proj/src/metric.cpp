#include "stablab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stablab/errors.hpp"

namespace stablab {

namespace {

Vec shifted(const Vec& x, int axis, double delta) {
  Vec y = x;
  y[axis] += delta;
  return y;
}

std::string describe(const Vec& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < kDim; ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

double step_or_default(const MetricChart& chart, double h) {
  return h > 0.0 ? h : default_step(chart);
}

// ∂_k g_ij by central differences.
std::array<Mat, kDim> metric_derivatives(const MetricChart& chart, const Vec& x,
                                         double h) {
  std::array<Mat, kDim> dg{};
  for (int k = 0; k < kDim; ++k) {
    const Mat gp = metric_at(chart, shifted(x, k, h));
    const Mat gm = metric_at(chart, shifted(x, k, -h));
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) dg[k][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
  }
  return dg;
}

Christoffel christoffel_unchecked(const MetricChart& chart, const Vec& x, double h) {
  const Mat gi = inverse_metric(chart, x);
  const auto dg = metric_derivatives(chart, x, h);
  Christoffel gamma{};
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) {
        double s = 0.0;
        for (int m = 0; m < kDim; ++m)
          s += gi[k][m] * (dg[i][m][j] + dg[j][i][m] - dg[m][i][j]);
        gamma[k][i][j] = 0.5 * s;
        gamma[k][j][i] = 0.5 * s;
      }
  return gamma;
}

Vec raise(const Mat& gi, const Vec& w) {
  Vec v{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) v[i] += gi[i][j] * w[j];
  return v;
}

// Symmetric second partials ∂²_ij φ.
Mat second_partials(const ScalarFunction& f, const Vec& x, double h) {
  Mat s{};
  if (f.gradient) {
    std::array<Vec, kDim> dp{}, dm{};
    for (int i = 0; i < kDim; ++i) {
      dp[i] = f.gradient(shifted(x, i, h));
      dm[i] = f.gradient(shifted(x, i, -h));
    }
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) {
        const double a = (dp[i][j] - dm[i][j]) / (2.0 * h);
        const double b = (dp[j][i] - dm[j][i]) / (2.0 * h);
        s[i][j] = s[j][i] = 0.5 * (a + b);
      }
    return s;
  }
  const double f0 = f.value(x);
  for (int i = 0; i < kDim; ++i) {
    s[i][i] = (f.value(shifted(x, i, h)) - 2.0 * f0 + f.value(shifted(x, i, -h))) / (h * h);
    for (int j = i + 1; j < kDim; ++j) {
      const double pp = f.value(shifted(shifted(x, i, h), j, h));
      const double pm = f.value(shifted(shifted(x, i, h), j, -h));
      const double mp = f.value(shifted(shifted(x, i, -h), j, h));
      const double mm = f.value(shifted(shifted(x, i, -h), j, -h));
      s[i][j] = s[j][i] = (pp - pm - mp + mm) / (4.0 * h * h);
    }
  }
  return s;
}

Mat hessian_components(const MetricChart& chart, const ScalarFunction& f,
                       const Vec& x, double h) {
  const Mat s = second_partials(f, x, h);
  const Vec d = partials(f, x, h);
  const Christoffel gamma = christoffel_unchecked(chart, x, h);
  Mat hess{};
  for (int i = 0; i < kDim; ++i)
    for (int j = i; j < kDim; ++j) {
      double v = s[i][j];
      for (int k = 0; k < kDim; ++k) v -= gamma[k][i][j] * d[k];
      hess[i][j] = hess[j][i] = v;
    }
  return hess;
}

Mat ricci_unchecked(const MetricChart& chart, const Vec& x, double h) {
  const Christoffel g0 = christoffel_unchecked(chart, x, h);
  // dgamma[m][k][i][j] = ∂_m Γ^k_ij
  std::array<Christoffel, kDim> dgamma{};
  for (int m = 0; m < kDim; ++m) {
    const Christoffel gp = christoffel_unchecked(chart, shifted(x, m, h), h);
    const Christoffel gm = christoffel_unchecked(chart, shifted(x, m, -h), h);
    for (int k = 0; k < kDim; ++k)
      for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j)
          dgamma[m][k][i][j] = (gp[k][i][j] - gm[k][i][j]) / (2.0 * h);
  }
  Mat ric{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      double r = 0.0;
      for (int k = 0; k < kDim; ++k) {
        r += dgamma[k][k][i][j] - dgamma[j][k][i][k];
        for (int l = 0; l < kDim; ++l)
          r += g0[k][k][l] * g0[l][i][j] - g0[k][j][l] * g0[l][i][k];
      }
      ric[i][j] = r;
    }
  for (int i = 0; i < kDim; ++i)
    for (int j = i + 1; j < kDim; ++j) ric[i][j] = ric[j][i] = 0.5 * (ric[i][j] + ric[j][i]);
  return ric;
}

double laplace_unchecked(const MetricChart& chart, const ScalarFunction& f,
                         const Vec& x, double h) {
  // Δφ = (1/√g) ∂_i(√g g^{ij} ∂_j φ), the divergence of ∇φ.
  double acc = 0.0;
  for (int i = 0; i < kDim; ++i) {
    double flux[2];
    for (int s = 0; s < 2; ++s) {
      const Vec y = shifted(x, i, s == 0 ? h : -h);
      const Mat g = metric_at(chart, y);
      const Vec v = raise(inverse(g), partials(f, y, h));
      flux[s] = sqrt_det(g) * v[i];
    }
    acc += (flux[0] - flux[1]) / (2.0 * h);
  }
  return acc / sqrt_det(metric_at(chart, x));
}

}  // namespace

double MetricChart::extent() const {
  double e = 0.0;
  for (const auto& a : axes) e = std::max(e, a.length());
  return e;
}

bool MetricChart::compact() const {
  return std::none_of(axes.begin(), axes.end(),
                      [](const Axis& a) { return a.kind == AxisKind::Bounded; });
}

double default_step(const MetricChart& chart) { return 1e-4 * chart.extent(); }

Mat metric_at(const MetricChart& chart, const Vec& x) {
  const Mat g = chart.metric(x);
  for (int i = 0; i < kDim; ++i)
    for (int j = i + 1; j < kDim; ++j)
      if (std::abs(g[i][j] - g[j][i]) > 1e-12 * (1.0 + std::abs(g[i][j])))
        throw NonSPDMetric("metric not symmetric at " + describe(x));
  return g;
}

namespace {
// Cholesky factor; throws NonSPDMetric on a non-positive pivot.
Mat cholesky(const Mat& g) {
  Mat l{};
  for (int j = 0; j < kDim; ++j) {
    double d = g[j][j];
    for (int k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (!(d > 0.0)) throw NonSPDMetric("metric is not positive definite");
    l[j][j] = std::sqrt(d);
    for (int i = j + 1; i < kDim; ++i) {
      double s = g[i][j];
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = s / l[j][j];
    }
  }
  return l;
}
}  // namespace

double sqrt_det(const Mat& g) {
  const Mat l = cholesky(g);
  double p = 1.0;
  for (int i = 0; i < kDim; ++i) p *= l[i][i];
  return p;
}

Mat inverse(const Mat& g) {
  cholesky(g);
  // Gauss-Jordan on [g | I]; g is SPD so no pivoting is needed.
  Mat a = g;
  Mat inv{};
  for (int i = 0; i < kDim; ++i) inv[i][i] = 1.0;
  for (int c = 0; c < kDim; ++c) {
    const double p = a[c][c];
    for (int j = 0; j < kDim; ++j) {
      a[c][j] /= p;
      inv[c][j] /= p;
    }
    for (int r = 0; r < kDim; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      for (int j = 0; j < kDim; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  for (int i = 0; i < kDim; ++i)
    for (int j = i + 1; j < kDim; ++j) inv[i][j] = inv[j][i] = 0.5 * (inv[i][j] + inv[j][i]);
  return inv;
}

Mat inverse_metric(const MetricChart& chart, const Vec& x) {
  try {
    return inverse(metric_at(chart, x));
  } catch (const NonSPDMetric&) {
    throw NonSPDMetric("metric of chart '" + chart.name + "' is not SPD at " + describe(x));
  }
}

void check_reach(const MetricChart& chart, const Vec& x, double reach) {
  for (int i = 0; i < kDim; ++i) {
    const Axis& a = chart.axes[i];
    if (a.kind == AxisKind::Periodic) continue;
    if (x[i] - reach < a.lo || x[i] + reach > a.hi)
      throw EdgeProximity("stencil of reach " + std::to_string(reach) + " at " +
                          describe(x) + " leaves chart '" + chart.name + "'");
  }
}

Christoffel christoffel(const MetricChart& chart, const Vec& x, double h) {
  h = step_or_default(chart, h);
  check_reach(chart, x, h);
  return christoffel_unchecked(chart, x, h);
}

Vec partials(const ScalarFunction& f, const Vec& x, double h) {
  if (f.gradient) return f.gradient(x);
  Vec d{};
  for (int i = 0; i < kDim; ++i)
    d[i] = (f.value(shifted(x, i, h)) - f.value(shifted(x, i, -h))) / (2.0 * h);
  return d;
}

PointVector grad(const MetricChart& chart, const ScalarFunction& f, const Vec& x,
                 double h) {
  h = step_or_default(chart, h);
  if (!f.gradient) check_reach(chart, x, h);
  return {raise(inverse_metric(chart, x), partials(f, x, h))};
}

double grad_norm(const MetricChart& chart, const ScalarFunction& f, const Vec& x,
                 double h) {
  return norm(metric_at(chart, x), grad(chart, f, x, h));
}

double divergence(const MetricChart& chart, const VectorFunction& field,
                  const Vec& x, double h) {
  h = step_or_default(chart, h);
  check_reach(chart, x, h);
  double acc = 0.0;
  for (int i = 0; i < kDim; ++i) {
    const Vec yp = shifted(x, i, h);
    const Vec ym = shifted(x, i, -h);
    acc += (sqrt_det(metric_at(chart, yp)) * field(yp)[i] -
            sqrt_det(metric_at(chart, ym)) * field(ym)[i]) /
           (2.0 * h);
  }
  return acc / sqrt_det(metric_at(chart, x));
}

double laplace_beltrami(const MetricChart& chart, const ScalarFunction& f,
                        const Vec& x, double h) {
  h = step_or_default(chart, h);
  check_reach(chart, x, f.gradient ? h : 2.0 * h);
  return laplace_unchecked(chart, f, x, h);
}

PointTwoTensor hessian(const MetricChart& chart, const ScalarFunction& f,
                       const Vec& x, double h) {
  h = step_or_default(chart, h);
  check_reach(chart, x, h);
  return {hessian_components(chart, f, x, h), Variance::Covariant};
}

double hessian_norm_sq(const MetricChart& chart, const ScalarFunction& f,
                       const Vec& x, double h) {
  const PointTwoTensor hs = hessian(chart, f, x, h);
  const Mat g = metric_at(chart, x);
  return norm_sq(g, inverse(g), hs);
}

PointTwoTensor ricci(const MetricChart& chart, const Vec& x, double h) {
  h = step_or_default(chart, h);
  check_reach(chart, x, 2.0 * h);
  return {ricci_unchecked(chart, x, h), Variance::Covariant};
}

double bochner_residual(const MetricChart& chart, const ScalarFunction& f,
                        const Vec& x, double h) {
  h = step_or_default(chart, h);
  check_reach(chart, x, (f.gradient ? 2.0 : 3.0) * h);

  const auto grad_sq = [&](const Vec& y) {
    const Mat g = metric_at(chart, y);
    const Vec d = partials(f, y, h);
    const Vec v = raise(inverse(g), d);
    double s = 0.0;
    for (int i = 0; i < kDim; ++i) s += d[i] * v[i];
    return s;
  };
  const double half_lap_grad_sq =
      0.5 * laplace_unchecked(chart, ScalarFunction{grad_sq, {}}, x, h);

  const Mat g = metric_at(chart, x);
  const Mat gi = inverse(g);
  const PointTwoTensor hs{hessian_components(chart, f, x, h), Variance::Covariant};
  const double hess_sq = norm_sq(g, gi, hs);

  // ⟨∇Δφ, ∇φ⟩ = g^{ij} ∂_i(Δφ) ∂_j φ
  Vec dlap{};
  for (int i = 0; i < kDim; ++i)
    dlap[i] = (laplace_unchecked(chart, f, shifted(x, i, h), h) -
               laplace_unchecked(chart, f, shifted(x, i, -h), h)) /
              (2.0 * h);
  const Vec d = partials(f, x, h);
  const PointVector gradf{raise(gi, d)};
  double drift = 0.0;
  for (int i = 0; i < kDim; ++i) drift += dlap[i] * gradf.components[i];

  const PointTwoTensor ric{ricci_unchecked(chart, x, h), Variance::Covariant};
  return half_lap_grad_sq - hess_sq - drift - contract(ric, gradf);
}

namespace {
struct GradientFrame {
  Mat g;
  Mat gi;
  Vec d;        // ∂_i φ
  PointVector v;  // ∇φ
  double norm;
};

GradientFrame frame_at(const MetricChart& chart, const ScalarFunction& f,
                       const Vec& x, double h, double grad_floor) {
  GradientFrame fr;
  fr.g = metric_at(chart, x);
  fr.gi = inverse(fr.g);
  fr.d = partials(f, x, h);
  fr.v = {raise(fr.gi, fr.d)};
  fr.norm = norm(fr.g, fr.v);
  if (!(fr.norm > grad_floor))
    throw BelowGradientFloor("|grad| = " + std::to_string(fr.norm) + " <= floor " +
                             std::to_string(grad_floor) + " at " + describe(x));
  return fr;
}
}  // namespace

double kato_gap(const MetricChart& chart, const ScalarFunction& f, const Vec& x,
                double grad_floor, double h) {
  h = step_or_default(chart, h);
  check_reach(chart, x, h);
  const GradientFrame fr = frame_at(chart, f, x, h, grad_floor);
  const PointTwoTensor hs{hessian_components(chart, f, x, h), Variance::Covariant};
  // ∂_k|∇φ| = H_kj (∇φ)^j / |∇φ| by metric compatibility.
  PointCovector dn{};
  for (int k = 0; k < kDim; ++k) {
    for (int j = 0; j < kDim; ++j) dn.components[k] += hs.components[k][j] * fr.v.components[j];
    dn.components[k] /= fr.norm;
  }
  return norm_sq(fr.g, fr.gi, hs) - norm_sq(fr.gi, dn);
}

double parallelism_defect(const MetricChart& chart, const ScalarFunction& f,
                          const Vec& x, double grad_floor, double h) {
  h = step_or_default(chart, h);
  check_reach(chart, x, h);
  const GradientFrame fr = frame_at(chart, f, x, h, grad_floor);
  const Mat hs = hessian_components(chart, f, x, h);
  // ∇_j (∇φ)^k = g^{ka} H_aj, raised on j: a^{k,i} = g^{ka} H_ab g^{bi}.
  Mat up{};
  for (int k = 0; k < kDim; ++k)
    for (int i = 0; i < kDim; ++i)
      for (int a = 0; a < kDim; ++a)
        for (int b = 0; b < kDim; ++b) up[k][i] += fr.gi[k][a] * hs[a][b] * fr.gi[b][i];
  static_assert(kDim == 2, "the area-form determinant below is two-dimensional");
  const double area = sqrt_det(fr.g);
  double worst = 0.0;
  for (int k = 0; k < kDim; ++k) {
    const double det = up[k][0] * fr.v.components[1] - up[k][1] * fr.v.components[0];
    worst = std::max(worst, std::abs(area * det));
  }
  return worst / (fr.norm * fr.norm);
}

double inner(const Mat& g, const PointVector& a, const PointVector& b) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) s += g[i][j] * a.components[i] * b.components[j];
  return s;
}

double norm(const Mat& g, const PointVector& a) { return std::sqrt(std::max(0.0, inner(g, a, a))); }

double norm_sq(const Mat& g_inv, const PointCovector& w) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) s += g_inv[i][j] * w.components[i] * w.components[j];
  return s;
}

double norm_sq(const Mat& g, const Mat& g_inv, const PointTwoTensor& t) {
  const Mat& r = t.variance == Variance::Covariant ? g_inv : g;
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l)
          s += r[i][k] * r[j][l] * t.components[i][j] * t.components[k][l];
  return s;
}

double contract(const PointTwoTensor& t, const PointVector& a) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) s += t.components[i][j] * a.components[i] * a.components[j];
  return s;
}

}  // namespace stablab

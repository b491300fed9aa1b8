#include "stablab/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stablab/errors.hpp"
#include "stablab/numeric.hpp"
#include "stablab/stability.hpp"

namespace stablab {

namespace {

struct NodeTerms {
  double grad_sq = 0.0;   // |∇u|²
  double hess_sq = 0.0;   // |H_u|²
  double kato_sq = 0.0;   // |∇|∇u||² = |H ∇u|² / |∇u|²
  double ricci = 0.0;     // Ric(∇u, ∇u)
};

Christoffel christoffel_at(const MetricChart& chart, const Vec& x) {
  return chart.analytic_christoffel ? chart.analytic_christoffel(x) : christoffel(chart, x);
}

Mat ricci_at(const MetricChart& chart, const Vec& x) {
  return chart.analytic_ricci ? chart.analytic_ricci(x) : ricci(chart, x).components;
}

NodeTerms node_terms(const StructuredGrid& grid, std::span<const double> u, std::size_t p) {
  NodeTerms t;
  const auto s = node_second_partials(grid, u, p);
  if (!s) throw SupportViolation("second differences need both neighbours at node " +
                                 std::to_string(p));
  const Vec x = grid.coord(p);
  const Vec d = node_partials(grid, u, p);
  const Mat& gi = grid.inv_metric(p);
  const Christoffel gamma = christoffel_at(grid.chart(), x);
  Mat h{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      h[i][j] = (*s)[i][j];
      for (int k = 0; k < kDim; ++k) h[i][j] -= gamma[k][i][j] * d[k];
    }
  Vec v{};  // ∇u
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) v[i] += gi[i][j] * d[j];
  for (int i = 0; i < kDim; ++i) t.grad_sq += d[i] * v[i];
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l) t.hess_sq += gi[i][k] * gi[j][l] * h[i][j] * h[k][l];
  Vec hv{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) hv[i] += h[i][j] * v[j];
  if (t.grad_sq > 0.0) {
    double q = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) q += gi[i][j] * hv[i] * hv[j];
    t.kato_sq = q / t.grad_sq;
  }
  const Mat ric = ricci_at(grid.chart(), x);
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) t.ricci += ric[i][j] * v[i] * v[j];
  return t;
}

double clamped_gap(const NodeTerms& t, double grad_floor) {
  return std::sqrt(t.grad_sq) <= grad_floor ? 0.0 : t.hess_sq - t.kato_sq;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

nlohmann::json GFReport::to_json() const {
  return {{"cutoff", cutoff_id}, {"grad_floor", grad_floor}, {"lhs", lhs},
          {"rhs", rhs},          {"slack", slack},           {"tolerance", tolerance},
          {"ricci_term", ricci_term}, {"kato_term", kato_term}, {"pass", pass}};
}

std::string GFReport::csv_header() {
  return "cutoff,grad_floor,lhs,rhs,slack,tolerance,ricci_term,kato_term,pass";
}

std::string GFReport::csv_row() const {
  return cutoff_id + "," + fmt(grad_floor) + "," + fmt(lhs) + "," + fmt(rhs) + "," +
         fmt(slack) + "," + fmt(tolerance) + "," + fmt(ricci_term) + "," + fmt(kato_term) +
         "," + (pass ? "true" : "false");
}

GFReport gf_report(const StructuredGrid& grid, std::span<const double> u,
                   std::span<const double> phi, double grad_floor, const std::string& cutoff_id) {
  check_support(grid, phi, 2);
  const auto w = grid.weights();
  const std::size_t n = grid.size();
  std::vector<double> ric(n, 0.0), gap(n, 0.0), rhs(n, 0.0), scale(n, 0.0);
  parallel_for(n, [&](std::size_t p) {
    const Vec dphi = node_partials(grid, phi, p);
    const Mat& gi = grid.inv_metric(p);
    double gphi = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) gphi += gi[i][j] * dphi[i] * dphi[j];
    if (phi[p] == 0.0 && gphi == 0.0) return;
    const NodeTerms t = node_terms(grid, u, p);
    const double p2 = phi[p] * phi[p];
    ric[p] = w[p] * t.ricci * p2;
    gap[p] = w[p] * clamped_gap(t, grad_floor) * p2;
    rhs[p] = w[p] * t.grad_sq * gphi;
    scale[p] = w[p] * ((t.hess_sq + t.grad_sq) * p2 + t.grad_sq * gphi);
  });
  GFReport r;
  r.cutoff_id = cutoff_id;
  r.grad_floor = grad_floor;
  r.ricci_term = exact_sum(ric);
  r.kato_term = exact_sum(gap);
  ExactSum lhs;
  for (std::size_t p = 0; p < n; ++p) {
    lhs.add(ric[p]);
    lhs.add(gap[p]);
  }
  r.lhs = lhs.value();
  r.rhs = exact_sum(rhs);
  r.slack = r.rhs - r.lhs;
  const double h = grid.spacing_scale();
  r.tolerance = 10.0 * h * h * exact_sum(scale);
  r.pass = r.slack >= -r.tolerance;
  return r;
}

double sz_derivation_residual(const StructuredGrid& grid, const Nonlinearity& nl,
                              std::span<const double> u, std::span<const double> phi,
                              double solution_tol) {
  const double res = sup_residual(grid, nl, u);
  if (res > solution_tol)
    throw NotASolution("sup |residual| = " + std::to_string(res) + " exceeds " +
                       std::to_string(solution_tol));
  check_support(grid, phi, 2);
  const Field gn = grad_norm_field(grid, u);
  Field xi(grid.size());
  for (std::size_t p = 0; p < xi.size(); ++p) xi[p] = gn[p] * phi[p];
  const double q = stability_form(grid, nl, u, xi);
  // Unclamped: a floor of −1 keeps every node.
  const GFReport r = gf_report(grid, u, phi, -1.0);
  return std::abs(q - r.slack);
}

VPIntegral vp_integral(const StructuredGrid& grid, std::span<const double> u,
                       std::span<const double> region_weight, double grad_floor) {
  const auto w = grid.weights();
  const std::size_t n = grid.size();
  std::vector<double> ric(n, 0.0), gap(n, 0.0);
  parallel_for(n, [&](std::size_t p) {
    if (region_weight[p] == 0.0) return;
    const NodeTerms t = node_terms(grid, u, p);
    ric[p] = w[p] * t.ricci * region_weight[p];
    gap[p] = w[p] * clamped_gap(t, grad_floor) * region_weight[p];
  });
  return {exact_sum(ric), exact_sum(gap)};
}

}  // namespace stablab

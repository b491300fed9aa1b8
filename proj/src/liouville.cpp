#include "stablab/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "stablab/errors.hpp"
#include "stablab/numeric.hpp"

namespace stablab {

namespace {

double smoothstep(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
double smoothstep_slope(double x) { return 30.0 * x * x * (1.0 - x) * (1.0 - x); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

double cutoff_profile(double t) {
  const double a = std::abs(t);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  return 1.0 - smoothstep(a - 1.0);
}

double cutoff_profile_slope(double t) {
  const double a = std::abs(t);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  const double s = -smoothstep_slope(a - 1.0);
  return t < 0.0 ? -s : s;
}

Field make_cutoff(const StructuredGrid& grid, std::span<const double> dist, double R) {
  const double h = grid.spacing_scale();
  if (!(R > 4.0 * h))
    throw RadiusTooSmall("R = " + std::to_string(R) + " must exceed 4h = " + std::to_string(4.0 * h));
  for (std::size_t p = 0; p < grid.size(); ++p)
    if (grid.edge_distance(p) < 4 && dist[p] < 2.0 * R)
      throw SupportViolation("the 2R-ball for R = " + std::to_string(R) +
                             " reaches within 4 nodes of a truncation edge");
  Field tau(grid.size());
  for (std::size_t p = 0; p < tau.size(); ++p) tau[p] = cutoff_profile(dist[p] / R);
  return tau;
}

std::vector<VolumeRow> volume_growth_scan(const Discretization& disc,
                                          std::span<const double> dist,
                                          std::span<const double> radii) {
  std::vector<VolumeRow> rows;
  for (double R : radii) {
    if (R < 0.0) throw ConfigError("negative radius in volume scan");
    VolumeRow row;
    row.R = R;
    row.volume = ball_volume(disc, dist, R);
    if (R > 0.0) {
      row.r2 = row.volume / (R * R);
      row.r4 = row.volume / (R * R * R * R);
    }
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json CaccioppoliReport::to_json() const {
  return {{"R", R},           {"lhs", lhs},       {"rhs", rhs},
          {"m_minus", m_minus}, {"m_plus", m_plus}, {"c_star", c_star},
          {"c_bar", c_bar},   {"volume_2r", volume_2r}, {"pass", pass}};
}

CaccioppoliReport caccioppoli_check(const StructuredGrid& grid, const Nonlinearity& nl,
                                    std::span<const double> u, std::span<const double> dist,
                                    double R, double slack) {
  CaccioppoliReport rep;
  rep.R = R;
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  rep.m_minus = *lo;
  rep.m_plus = *hi;
  const auto check_sign = [&](double t) {
    const double v = nl.f(t);
    if (v < 0.0)
      throw SignConditionViolated("f(" + std::to_string(t) + ") = " + std::to_string(v) + " < 0");
  };
  for (int k = 0; k <= 400; ++k) check_sign(-10.0 + 20.0 * k / 400.0);
  for (int k = 0; k <= 100; ++k) check_sign(rep.m_minus + (rep.m_plus - rep.m_minus) * k / 100.0);

  const double osc = rep.m_plus - rep.m_minus;
  rep.c_star = 2.0 * osc * osc;
  rep.c_bar = 4.0 * osc * osc * kCutoffLipschitz * kCutoffLipschitz;
  const Field gn = grad_norm_field(grid, u);
  const auto w = grid.weights();
  ExactSum lhs;
  for (std::size_t p = 0; p < gn.size(); ++p)
    if (dist[p] < R) lhs.add(w[p] * gn[p] * gn[p]);
  rep.lhs = lhs.value();
  rep.volume_2r = ball_volume(grid, dist, 2.0 * R);
  rep.rhs = rep.c_bar / (R * R) * rep.volume_2r;
  rep.pass = rep.lhs <= rep.rhs * (1.0 + slack);
  return rep;
}

std::vector<ZacRow> zac_energy(const StructuredGrid& grid, std::span<const double> u,
                               std::span<const double> dist, std::span<const double> radii) {
  const Field gu = grad_norm_field(grid, u);
  const auto w = grid.weights();
  std::vector<ZacRow> rows;
  for (double R : radii) {
    const Field tau = make_cutoff(grid, dist, R);
    const Field gt = grad_norm_field(grid, tau);
    ZacRow row;
    row.R = R;
    ExactSum e, ce;
    for (std::size_t p = 0; p < gu.size(); ++p) {
      e.add(w[p] * gu[p] * gu[p] * gt[p] * gt[p]);
      ce.add(w[p] * gt[p] * gt[p]);
      if (dist[p] < 2.0 * R || gt[p] > 0.0) row.sup_grad = std::max(row.sup_grad, gu[p]);
    }
    row.energy = e.value();
    row.cutoff_energy = ce.value();
    row.volume_2r = ball_volume(grid, dist, 2.0 * R);
    const double s2 = row.sup_grad * row.sup_grad;
    row.link1 = s2 * row.cutoff_energy;
    row.majorant = s2 * kCutoffLipschitz * kCutoffLipschitz * row.volume_2r / (R * R);
    row.link1_ok = row.energy <= row.link1 * (1.0 + 1e-12);
    row.link2_ok = row.link1 <= row.majorant * 1.1;
    rows.push_back(row);
  }
  return rows;
}

Field log_cutoff(const Discretization& disc, std::span<const double> dist, double r_inner,
                 double r_outer) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner))
    throw ConfigError("log cutoff needs 0 < R_inner < R_outer");
  const double span = std::log(r_outer) - std::log(r_inner);
  Field phi(disc.size());
  for (std::size_t p = 0; p < phi.size(); ++p) {
    const double d = dist[p];
    if (d <= r_inner) phi[p] = 1.0;
    else if (d >= r_outer) phi[p] = 0.0;
    else phi[p] = (std::log(r_outer) - std::log(d)) / span;
  }
  return phi;
}

double parabolicity_probe(const Discretization& disc, std::span<const double> dist,
                          double r_outer, double r_inner) {
  const Field phi = log_cutoff(disc, dist, r_inner, r_outer);
  check_support(disc, phi, 2);
  return disc.dirichlet_form(phi, phi);
}

std::string scan_csv(const std::vector<VolumeRow>& volumes, const std::vector<ZacRow>& zac) {
  std::ostringstream os;
  os << "R,V_R,R^-2V_R,R^-4V_R,zac_energy,majorant\n";
  const std::size_t n = std::max(volumes.size(), zac.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double R = i < volumes.size() ? volumes[i].R : zac[i].R;
    os << fmt(R) << ',';
    if (i < volumes.size()) {
      const VolumeRow& v = volumes[i];
      os << fmt(v.volume) << ',' << (v.r2 ? fmt(*v.r2) : "") << ',' << (v.r4 ? fmt(*v.r4) : "");
    } else {
      os << ",,";
    }
    os << ',';
    if (i < zac.size()) os << fmt(zac[i].energy) << ',' << fmt(zac[i].majorant);
    else os << ',';
    os << '\n';
  }
  return os.str();
}

}  // namespace stablab

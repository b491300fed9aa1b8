#include "stablab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stablab/errors.hpp"
#include "stablab/numeric.hpp"

namespace stablab {

namespace {
constexpr double kPi = std::numbers::pi;

int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

// s(0) = −1, s(1) = +1: sign of corner (a) in a one-sided cell difference.
double corner_sign(int a) { return a == 0 ? -1.0 : 1.0; }
}  // namespace

bool Discretization::has_fixed() const {
  const auto f = fixed();
  return std::any_of(f.begin(), f.end(), [](std::uint8_t b) { return b != 0; });
}

// ---- StructuredGrid -------------------------------------------------------

StructuredGrid::StructuredGrid(MetricChart chart, Index nodes)
    : chart_(std::move(chart)), nodes_(nodes) {
  for (int a = 0; a < kDim; ++a) {
    if (nodes_[a] < 8)
      throw ConfigError("resolution below minimum 8 (axis " + std::to_string(a) + " has " +
                        std::to_string(nodes_[a]) + ")");
    const Axis& ax = chart_.axes[a];
    switch (ax.kind) {
      case AxisKind::Bounded: spacing_[a] = ax.length() / (nodes_[a] - 1); break;
      case AxisKind::Periodic:
      case AxisKind::Polar: spacing_[a] = ax.length() / nodes_[a]; break;
    }
    if (ax.kind == AxisKind::Polar) {
      const int b = 1 - a;
      if (kDim != 2 || chart_.axes[b].kind != AxisKind::Periodic || nodes_[b] % 2 != 0)
        throw ConfigError("a polar axis needs a periodic partner axis with an even node count");
    }
  }

  std::size_t n = 1;
  for (int a = 0; a < kDim; ++a) n *= static_cast<std::size_t>(nodes_[a]);
  coords_.resize(n);
  metric_.resize(n);
  inv_metric_.resize(n);
  sqrt_det_.resize(n);
  weights_.resize(n);
  fixed_.assign(n, 0);
  for (auto& f : face_coef_) f.assign(n, 0.0);
  diag_.assign(n, 0.0);

  const double cell = spacing_[0] * spacing_[1];
  for (std::size_t p = 0; p < n; ++p) {
    const Index ij = multi_index(p);
    Vec x{};
    for (int a = 0; a < kDim; ++a) x[a] = axis_coord(a, ij[a]);
    coords_[p] = x;
    metric_[p] = metric_at(chart_, x);
    inv_metric_[p] = inverse_metric(chart_, x);
    sqrt_det_[p] = stablab::sqrt_det(metric_[p]);
    double w = sqrt_det_[p] * cell;
    for (int a = 0; a < kDim; ++a) {
      if (chart_.axes[a].kind != AxisKind::Bounded) continue;
      if (ij[a] == 0 || ij[a] == nodes_[a] - 1) {
        w *= 0.5;
        fixed_[p] = 1;
      }
    }
    weights_[p] = w;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j)
        if (i != j && metric_[p][i][j] != 0.0) diagonal_ = false;
  }

  // Face coefficients: √g g^{aa} at the face midpoint, scaled by the dual
  // cell; faces lying on a truncation edge carry half a dual cell.
  for (std::size_t p = 0; p < n; ++p) {
    const Index ij = multi_index(p);
    for (int a = 0; a < kDim; ++a) {
      if (!face_partner(p, a, +1)) continue;
      Vec mid = coords_[p];
      mid[a] += 0.5 * spacing_[a];
      const Mat g = metric_at(chart_, mid);
      double c = stablab::sqrt_det(g) * inverse(g)[a][a] * cell / (spacing_[a] * spacing_[a]);
      for (int b = 0; b < kDim; ++b) {
        if (b == a || chart_.axes[b].kind != AxisKind::Bounded) continue;
        if (ij[b] == 0 || ij[b] == nodes_[b] - 1) c *= 0.5;
      }
      face_coef_[a][p] = c;
    }
  }
  if (!diagonal_) {
    cell_coef_.assign(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      if (!face_partner(p, 0, +1) || !face_partner(p, 1, +1)) continue;
      Vec mid = coords_[p];
      mid[0] += 0.5 * spacing_[0];
      mid[1] += 0.5 * spacing_[1];
      const Mat g = metric_at(chart_, mid);
      cell_coef_[p] = stablab::sqrt_det(g) * inverse(g)[0][1] * cell;
    }
  }

  // Diagonal of K and a Gershgorin bound for W⁻¹K.
  double bound = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double d = 0.0;
    double off = 0.0;
    for (int a = 0; a < kDim; ++a) {
      if (face_partner(p, a, +1)) {
        d += face_coef_[a][p];
        off += face_coef_[a][p];
      }
      if (auto q = face_partner(p, a, -1)) {
        d += face_coef_[a][*q];
        off += face_coef_[a][*q];
      }
    }
    if (!diagonal_) {
      const double h01 = spacing_[0] * spacing_[1];
      for (int ca = 0; ca < 2; ++ca)
        for (int cb = 0; cb < 2; ++cb) {
          std::optional<std::size_t> q = p;
          if (ca) q = face_partner(*q, 0, -1);
          if (q && cb) q = face_partner(*q, 1, -1);
          if (!q) continue;
          const double b = cell_coef_[*q];
          d += 2.0 * b * corner_sign(ca) * corner_sign(cb) / (4.0 * h01);
          off += 2.0 * std::abs(b) / h01;
        }
    }
    diag_[p] = d;
    bound = std::max(bound, (std::abs(d) + off) / weights_[p]);
  }
  spectral_bound_ = bound;

  double s = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (int a = 0; a < kDim; ++a) s = std::max(s, std::sqrt(metric_[p][a][a]) * spacing_[a]);
  spacing_scale_ = s;
}

Vec StructuredGrid::origin() const {
  Vec o{};
  for (int a = 0; a < kDim; ++a) o[a] = axis_coord(a, 0);
  return o;
}

double StructuredGrid::axis_coord(int axis, int i) const {
  const Axis& ax = chart_.axes[axis];
  if (ax.kind == AxisKind::Polar) return ax.lo + (i + 0.5) * spacing_[axis];
  if (ax.kind == AxisKind::Bounded && i == nodes_[axis] - 1) return ax.hi;
  return ax.lo + i * spacing_[axis];
}

std::size_t StructuredGrid::index(const Index& ij) const {
  std::size_t p = 0;
  for (int a = 0; a < kDim; ++a) p = p * static_cast<std::size_t>(nodes_[a]) + ij[a];
  return p;
}

StructuredGrid::Index StructuredGrid::multi_index(std::size_t p) const {
  Index ij{};
  for (int a = kDim - 1; a >= 0; --a) {
    ij[a] = static_cast<int>(p % static_cast<std::size_t>(nodes_[a]));
    p /= static_cast<std::size_t>(nodes_[a]);
  }
  return ij;
}

std::optional<std::size_t> StructuredGrid::neighbor(std::size_t p, int axis,
                                                    int offset) const {
  Index ij = multi_index(p);
  const int n = nodes_[axis];
  int i = ij[axis] + offset;
  switch (chart_.axes[axis].kind) {
    case AxisKind::Periodic: i = wrap(i, n); break;
    case AxisKind::Bounded:
      if (i < 0 || i >= n) return std::nullopt;
      break;
    case AxisKind::Polar:
      if (i < 0 || i >= n) {
        // Across the pole: same colatitude offset, half a turn around.
        i = i < 0 ? -i - 1 : 2 * n - i - 1;
        if (i < 0 || i >= n) return std::nullopt;
        const int b = 1 - axis;
        ij[b] = wrap(ij[b] + nodes_[b] / 2, nodes_[b]);
      }
      break;
  }
  ij[axis] = i;
  return index(ij);
}

std::optional<std::size_t> StructuredGrid::face_partner(std::size_t p, int axis,
                                                        int dir) const {
  Index ij = multi_index(p);
  const int n = nodes_[axis];
  int i = ij[axis] + dir;
  if (chart_.axes[axis].kind == AxisKind::Periodic) {
    i = wrap(i, n);
  } else if (i < 0 || i >= n) {
    return std::nullopt;
  }
  ij[axis] = i;
  return index(ij);
}

std::vector<double> StructuredGrid::sample(const std::function<double(const Vec&)>& f) const {
  std::vector<double> out(size());
  parallel_for(size(), [&](std::size_t p) { out[p] = f(coords_[p]); });
  return out;
}

double StructuredGrid::cross_term(std::size_t p, std::span<const double> u) const {
  double acc = 0.0;
  for (int ca = 0; ca < 2; ++ca)
    for (int cb = 0; cb < 2; ++cb) {
      std::optional<std::size_t> q = p;
      if (ca) q = face_partner(*q, 0, -1);
      if (q && cb) q = face_partner(*q, 1, -1);
      if (!q) continue;
      const auto q10 = face_partner(*q, 0, +1);
      const auto q01 = face_partner(*q, 1, +1);
      if (!q10 || !q01) continue;
      const std::size_t q11 = *face_partner(*q10, 1, +1);
      const double d0 = ((u[*q10] - u[*q]) + (u[q11] - u[*q01])) / (2.0 * spacing_[0]);
      const double d1 = ((u[*q01] - u[*q]) + (u[q11] - u[*q10])) / (2.0 * spacing_[1]);
      acc += cell_coef_[*q] * (d0 * corner_sign(cb) / (2.0 * spacing_[1]) +
                               d1 * corner_sign(ca) / (2.0 * spacing_[0]));
    }
  return acc;
}

void StructuredGrid::stiffness(std::span<const double> u, std::span<double> out) const {
  parallel_for(size(), [&](std::size_t p) {
    double acc = 0.0;
    for (int a = 0; a < kDim; ++a) {
      if (auto q = face_partner(p, a, +1)) acc += face_coef_[a][p] * (u[p] - u[*q]);
      if (auto q = face_partner(p, a, -1)) acc += face_coef_[a][*q] * (u[p] - u[*q]);
    }
    if (!diagonal_) acc += cross_term(p, u);
    out[p] = acc;
  });
}

double StructuredGrid::dirichlet_form(std::span<const double> u,
                                      std::span<const double> v) const {
  std::vector<double> terms(size(), 0.0);
  parallel_for(size(), [&](std::size_t p) {
    double acc = 0.0;
    for (int a = 0; a < kDim; ++a)
      if (auto q = face_partner(p, a, +1))
        acc += face_coef_[a][p] * (u[*q] - u[p]) * (v[*q] - v[p]);
    if (!diagonal_ && cell_coef_[p] != 0.0) {
      const auto q10 = face_partner(p, 0, +1);
      const auto q01 = face_partner(p, 1, +1);
      const std::size_t q11 = *face_partner(*q10, 1, +1);
      const auto d = [&](std::span<const double> f, int axis) {
        return axis == 0 ? ((f[*q10] - f[p]) + (f[q11] - f[*q01])) / (2.0 * spacing_[0])
                         : ((f[*q01] - f[p]) + (f[q11] - f[*q10])) / (2.0 * spacing_[1]);
      };
      acc += cell_coef_[p] * (d(u, 0) * d(v, 1) + d(u, 1) * d(v, 0));
    }
    terms[p] = acc;
  });
  return exact_sum(terms);
}

int StructuredGrid::edge_distance(std::size_t p) const {
  const Index ij = multi_index(p);
  int d = kNoEdge;
  for (int a = 0; a < kDim; ++a)
    if (chart_.axes[a].kind == AxisKind::Bounded)
      d = std::min({d, ij[a], nodes_[a] - 1 - ij[a]});
  return d;
}

std::string StructuredGrid::describe() const {
  std::ostringstream os;
  os << chart_.name << " grid " << nodes_[0] << "x" << nodes_[1];
  return os.str();
}

// ---- AxisymmetricSphere ---------------------------------------------------

AxisymmetricSphere::AxisymmetricSphere(int n_theta, double radius, int mode)
    : radius_(radius), mode_(mode) {
  if (n_theta < 8)
    throw ConfigError("resolution below minimum 8 (" + std::to_string(n_theta) + " colatitude nodes)");
  if (!(radius > 0.0)) throw ConfigError("sphere radius must be positive");
  if (mode < 0) throw ConfigError("azimuthal mode must be nonnegative");
  const auto n = static_cast<std::size_t>(n_theta);
  dtheta_ = kPi / n_theta;
  theta_.resize(n);
  weights_.resize(n);
  modal_.resize(n);
  face_.assign(n, 0.0);
  diag_.assign(n, 0.0);
  fixed_.assign(n, 0);
  const double m2 = static_cast<double>(mode) * mode;
  // Coefficients are mirrored bit-for-bit about the equator so that fields odd
  // under θ ↦ π − θ stay exactly odd through every solve.
  for (std::size_t j = 0; j < n; ++j) {
    theta_[j] = (static_cast<double>(j) + 0.5) * dtheta_;
    const std::size_t jm = std::min(j, n - 1 - j);
    const double s = std::sin((static_cast<double>(jm) + 0.5) * dtheta_);
    weights_[j] = 2.0 * kPi * radius * radius * s * dtheta_;
    modal_[j] = 2.0 * kPi * dtheta_ * m2 / s;
    if (j + 1 < n) {
      const std::size_t fm = std::min(j + 1, n - 1 - j);
      face_[j] = 2.0 * kPi * std::sin(static_cast<double>(fm) * dtheta_) / dtheta_;
    }
  }
  double bound = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double f = face_[j] + (j > 0 ? face_[j - 1] : 0.0);
    diag_[j] = f + modal_[j];
    bound = std::max(bound, (2.0 * f + modal_[j]) / weights_[j]);
  }
  spectral_bound_ = bound;
}

std::vector<double> AxisymmetricSphere::sample(const std::function<double(double)>& f) const {
  std::vector<double> out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = f(theta_[j]);
  return out;
}

void AxisymmetricSphere::stiffness(std::span<const double> u, std::span<double> out) const {
  const std::size_t n = size();
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    if (j + 1 < n) acc += face_[j] * (u[j] - u[j + 1]);
    if (j > 0) acc += face_[j - 1] * (u[j] - u[j - 1]);
    acc += modal_[j] * u[j];
    out[j] = acc;
  }
}

double AxisymmetricSphere::dirichlet_form(std::span<const double> u,
                                          std::span<const double> v) const {
  ExactSum s;
  for (std::size_t j = 0; j + 1 < size(); ++j)
    s.add(face_[j] * (u[j + 1] - u[j]) * (v[j + 1] - v[j]));
  for (std::size_t j = 0; j < size(); ++j) s.add(modal_[j] * u[j] * v[j]);
  return s.value();
}

std::string AxisymmetricSphere::describe() const {
  std::ostringstream os;
  os << "axisymmetric sphere n_theta=" << size() << " radius=" << radius_ << " mode=" << mode_;
  return os.str();
}

// ---- field operations -------------------------------------------------------

void check_support(const Discretization& disc, std::span<const double> field, int margin) {
  for (std::size_t p = 0; p < disc.size(); ++p)
    if (disc.edge_distance(p) < margin && field[p] != 0.0)
      throw SupportViolation("field value " + std::to_string(field[p]) + " at node " +
                             std::to_string(p) + " lies within " + std::to_string(margin) +
                             " nodes of a truncation edge");
}

Field discrete_laplace_beltrami(const Discretization& disc, std::span<const double> u,
                                EdgePolicy policy) {
  if (policy == EdgePolicy::CompactSupport) check_support(disc, u, 2);
  Field out(disc.size());
  disc.stiffness(u, out);
  const auto w = disc.weights();
  const auto fixed = disc.fixed();
  for (std::size_t p = 0; p < out.size(); ++p)
    out[p] = (policy == EdgePolicy::DirichletCaps && fixed[p]) ? 0.0 : -out[p] / w[p];
  return out;
}

double integrate(const Discretization& disc, std::span<const double> f) {
  const auto w = disc.weights();
  ExactSum s;
  for (std::size_t p = 0; p < f.size(); ++p) s.add(w[p] * f[p]);
  return s.value();
}

double integration_by_parts_residual(const Discretization& disc,
                                     std::span<const double> phi,
                                     std::span<const double> psi) {
  Field k(disc.size());
  disc.stiffness(psi, k);
  const auto w = disc.weights();
  ExactSum s;
  for (std::size_t p = 0; p < k.size(); ++p) s.add(w[p] * phi[p] * (-k[p] / w[p]));
  s.add(disc.dirichlet_form(phi, psi));
  return std::abs(s.value());
}

Vec node_partials(const StructuredGrid& grid, std::span<const double> u, std::size_t p) {
  Vec d{};
  for (int a = 0; a < kDim; ++a) {
    const double h = grid.spacing()[a];
    const auto qp = grid.neighbor(p, a, +1);
    const auto qm = grid.neighbor(p, a, -1);
    if (qp && qm) {
      d[a] = (u[*qp] - u[*qm]) / (2.0 * h);
    } else if (qp) {
      const auto qpp = grid.neighbor(p, a, +2);
      d[a] = (-3.0 * u[p] + 4.0 * u[*qp] - u[*qpp]) / (2.0 * h);
    } else {
      const auto qmm = grid.neighbor(p, a, -2);
      d[a] = (3.0 * u[p] - 4.0 * u[*qm] + u[*qmm]) / (2.0 * h);
    }
  }
  return d;
}

std::optional<Mat> node_second_partials(const StructuredGrid& grid,
                                        std::span<const double> u, std::size_t p) {
  Mat s{};
  const Vec& h = grid.spacing();
  for (int a = 0; a < kDim; ++a) {
    const auto qp = grid.neighbor(p, a, +1);
    const auto qm = grid.neighbor(p, a, -1);
    if (!qp || !qm) return std::nullopt;
    s[a][a] = (u[*qp] - 2.0 * u[p] + u[*qm]) / (h[a] * h[a]);
    for (int b = a + 1; b < kDim; ++b) {
      const auto pp = grid.neighbor(*qp, b, +1);
      const auto pm = grid.neighbor(*qp, b, -1);
      const auto mp = grid.neighbor(*qm, b, +1);
      const auto mm = grid.neighbor(*qm, b, -1);
      if (!pp || !pm || !mp || !mm) return std::nullopt;
      s[a][b] = s[b][a] = (u[*pp] - u[*pm] - u[*mp] + u[*mm]) / (4.0 * h[a] * h[b]);
    }
  }
  return s;
}

Field grad_norm_field(const StructuredGrid& grid, std::span<const double> u) {
  Field out(grid.size());
  parallel_for(grid.size(), [&](std::size_t p) {
    const Vec d = node_partials(grid, u, p);
    const Mat& gi = grid.inv_metric(p);
    double s = 0.0;
    for (int i = 0; i < kDim; ++i)
      for (int j = 0; j < kDim; ++j) s += gi[i][j] * d[i] * d[j];
    out[p] = std::sqrt(std::max(0.0, s));
  });
  return out;
}

double ball_volume(const Discretization& disc, std::span<const double> dist, double R) {
  const auto w = disc.weights();
  ExactSum s;
  for (std::size_t p = 0; p < dist.size(); ++p)
    if (dist[p] < R) s.add(w[p]);
  return s.value();
}

}  // namespace stablab

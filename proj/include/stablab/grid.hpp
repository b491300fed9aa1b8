#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stablab/metric.hpp"

namespace stablab {

using Field = std::vector<double>;

/// A symmetric discretization of the Dirichlet energy ½∫|∇u|² dV_g together
/// with its quadrature. The discrete Laplace–Beltrami operator is
/// Δ_h = −W⁻¹K, so Σ_p w_p φ_p (Δ_h ψ)_p = −D(φ, ψ) holds to rounding.
class Discretization {
 public:
  virtual ~Discretization() = default;

  virtual std::size_t size() const = 0;
  virtual std::span<const double> weights() const = 0;
  /// out = K u, assembled as a sum of differences so constants map to exact 0.
  virtual void stiffness(std::span<const double> u, std::span<double> out) const = 0;
  /// D(u, v) accumulated face by face, independently of stiffness().
  virtual double dirichlet_form(std::span<const double> u, std::span<const double> v) const = 0;
  virtual std::span<const double> stiffness_diagonal() const = 0;
  /// 1 where the node sits on a truncation edge and carries a Dirichlet value.
  virtual std::span<const std::uint8_t> fixed() const = 0;
  /// Index distance to the nearest truncation edge; large when there is none.
  virtual int edge_distance(std::size_t p) const = 0;
  /// Largest metric length of one grid step.
  virtual double spacing_scale() const = 0;
  /// Gershgorin upper bound for the spectrum of W⁻¹K.
  virtual double spectral_bound() const = 0;
  virtual std::string describe() const = 0;

  bool has_fixed() const;
};

inline constexpr int kNoEdge = 1 << 28;

/// Node-centred structured grid over a chart. Bounded axes include both
/// endpoints; periodic axes wrap; polar axes are cell-centred so that no node
/// sits on a coordinate pole, and pointwise stencils reflect across the pole.
class StructuredGrid final : public Discretization {
 public:
  using Index = std::array<int, kDim>;

  StructuredGrid(MetricChart chart, Index nodes);

  const MetricChart& chart() const { return chart_; }
  const Index& nodes() const { return nodes_; }
  const Vec& spacing() const { return spacing_; }
  Vec origin() const;

  std::size_t index(const Index& ij) const;
  Index multi_index(std::size_t p) const;
  Vec coord(std::size_t p) const { return coords_[p]; }
  double axis_coord(int axis, int i) const;

  const Mat& metric(std::size_t p) const { return metric_[p]; }
  const Mat& inv_metric(std::size_t p) const { return inv_metric_[p]; }
  double sqrt_det(std::size_t p) const { return sqrt_det_[p]; }

  /// Stencil neighbour for pointwise differences (wraps periodic axes,
  /// reflects across poles); nullopt beyond a truncation edge.
  std::optional<std::size_t> neighbor(std::size_t p, int axis, int offset) const;
  /// Neighbour across a face of the flux stencil (never crosses a pole).
  std::optional<std::size_t> face_partner(std::size_t p, int axis, int dir) const;

  std::vector<double> sample(const std::function<double(const Vec&)>& f) const;
  bool diagonal_metric() const { return diagonal_; }

  std::size_t size() const override { return coords_.size(); }
  std::span<const double> weights() const override { return weights_; }
  void stiffness(std::span<const double> u, std::span<double> out) const override;
  double dirichlet_form(std::span<const double> u, std::span<const double> v) const override;
  std::span<const double> stiffness_diagonal() const override { return diag_; }
  std::span<const std::uint8_t> fixed() const override { return fixed_; }
  int edge_distance(std::size_t p) const override;
  double spacing_scale() const override { return spacing_scale_; }
  double spectral_bound() const override { return spectral_bound_; }
  std::string describe() const override;

 private:
  double cross_term(std::size_t p, std::span<const double> u) const;

  MetricChart chart_;
  Index nodes_;
  Vec spacing_{};
  std::vector<Vec> coords_;
  std::vector<Mat> metric_;
  std::vector<Mat> inv_metric_;
  std::vector<double> sqrt_det_;
  std::vector<double> weights_;
  std::array<std::vector<double>, kDim> face_coef_;  // face (p, p + e_axis)
  std::vector<double> cell_coef_;  // cross coefficient of the cell with lower corner p
  std::vector<double> diag_;
  std::vector<std::uint8_t> fixed_;
  bool diagonal_ = true;
  double spacing_scale_ = 0.0;
  double spectral_bound_ = 0.0;
};

/// Axisymmetric reduction of the round sphere of radius r to the colatitude θ,
/// restricted to the azimuthal Fourier mode m. Nodes are cell-centred so the
/// poles carry zero flux.
class AxisymmetricSphere final : public Discretization {
 public:
  AxisymmetricSphere(int n_theta, double radius = 1.0, int mode = 0);

  int mode() const { return mode_; }
  double radius() const { return radius_; }
  double theta(std::size_t j) const { return theta_[j]; }
  std::span<const double> thetas() const { return theta_; }
  double dtheta() const { return dtheta_; }
  std::vector<double> sample(const std::function<double(double)>& f) const;

  std::size_t size() const override { return theta_.size(); }
  std::span<const double> weights() const override { return weights_; }
  void stiffness(std::span<const double> u, std::span<double> out) const override;
  double dirichlet_form(std::span<const double> u, std::span<const double> v) const override;
  std::span<const double> stiffness_diagonal() const override { return diag_; }
  std::span<const std::uint8_t> fixed() const override { return fixed_; }
  int edge_distance(std::size_t) const override { return kNoEdge; }
  double spacing_scale() const override { return radius_ * dtheta_; }
  double spectral_bound() const override { return spectral_bound_; }
  std::string describe() const override;

 private:
  double radius_;
  int mode_;
  double dtheta_;
  std::vector<double> theta_;
  std::vector<double> weights_;
  std::vector<double> face_;   // face between j and j + 1
  std::vector<double> modal_;  // m² term
  std::vector<double> diag_;
  std::vector<std::uint8_t> fixed_;
  double spectral_bound_ = 0.0;
};

/// How discrete_laplace_beltrami treats values on truncation edges.
enum class EdgePolicy {
  CompactSupport,  // values must vanish on a 2-node margin
  DirichletCaps,   // edge values are boundary data; Δ_h is reported as 0 there
};

/// Throws SupportViolation if the field is nonzero within `margin` nodes of a
/// truncation edge.
void check_support(const Discretization& disc, std::span<const double> field,
                   int margin = 2);

Field discrete_laplace_beltrami(const Discretization& disc, std::span<const double> u,
                                EdgePolicy policy = EdgePolicy::CompactSupport);
double integrate(const Discretization& disc, std::span<const double> f);
/// |Σ w φ Δ_h ψ + D(φ, ψ)|
double integration_by_parts_residual(const Discretization& disc,
                                     std::span<const double> phi,
                                     std::span<const double> psi);

// Pointwise differences of node fields (second order in the interior).
/// ∂_i u at a node; one-sided next to truncation edges.
Vec node_partials(const StructuredGrid& grid, std::span<const double> u, std::size_t p);
/// ∂²_ij u at a node; nullopt if the stencil crosses a truncation edge.
std::optional<Mat> node_second_partials(const StructuredGrid& grid,
                                        std::span<const double> u, std::size_t p);
/// |∇_g u| at every node.
Field grad_norm_field(const StructuredGrid& grid, std::span<const double> u);

struct EikonalOptions {
  double tolerance = 1e-10;
  int max_rounds = 500;
};

/// Geodesic distance from a source point: first-order Godunov upwind solution
/// of |∇_g d| = 1 by Gauss–Seidel sweeps in 8 orderings. Requires a diagonal
/// metric at the nodes.
Field geodesic_distance(const StructuredGrid& grid, const Vec& source,
                        const EikonalOptions& options = {});

/// Σ w_p over nodes with dist_p < R.
double ball_volume(const Discretization& disc, std::span<const double> dist, double R);

}  // namespace stablab

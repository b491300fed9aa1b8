#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "stablab/grid.hpp"
#include "stablab/solver.hpp"

namespace stablab {

struct QSample {
  std::string id;
  double q = 0.0;        // Q(ξ)
  double norm_sq = 0.0;  // Σ w ξ²
};

struct StabilityConfig {
  double shift_margin = 0.1;     // σ = −max f′(u) − margin
  int max_iterations = 3000;     // inverse-iteration steps
  double eigen_tolerance = 1e-9; // target for the W-norm eigen residual
  double linear_tolerance = 1e-12;
  double tol_scale = 1.0;        // multiplies the verdict tolerance
  std::uint64_t seed = 1;        // random battery fields and start vector
};

/// Principal eigenvalue of L = −Δ_h − f′(u), test-form samples and verdict.
struct StabilityReport {
  double lambda_min = 0.0;
  double eigen_residual = 0.0;  // ‖Lv − λv‖_W / ‖v‖_W
  std::string method;
  int iterations = 0;
  std::vector<QSample> q_samples;
  std::string verdict = "inconclusive";  // stable | unstable | inconclusive
  double tolerance = 0.0;
  std::map<int, double> mode_lambdas;  // sphere: λ_min per azimuthal mode
  std::string note;
  Field eigenvector;

  nlohmann::json to_json() const;
};

/// (L v)_p = −(Δ_h v)_p − f′(u_p) v_p at free nodes, 0 on Dirichlet nodes.
Field apply_linearized(const Discretization& disc, const Nonlinearity& nl,
                       std::span<const double> u, std::span<const double> v);

/// Q(ξ) = D(ξ, ξ) − Σ w f′(u) ξ². Throws SupportViolation unless ξ vanishes on a
/// 2-node margin of every truncation edge.
double stability_form(const Discretization& disc, const Nonlinearity& nl,
                      std::span<const double> u, std::span<const double> xi);

/// max(1e−6, 10 h² max(1, max|f′(u)|)) times tol_scale.
double stability_tolerance(const Discretization& disc, const Nonlinearity& nl,
                           std::span<const double> u, double tol_scale = 1.0);

/// Shifted inverse iteration with Rayleigh-quotient refinement. The verdict
/// field is set from λ_min alone; EigenNonConvergence is reported as
/// "inconclusive" with the partial estimate.
StabilityReport principal_eigenvalue(const Discretization& disc, const Nonlinearity& nl,
                                     std::span<const double> u, const StabilityConfig& cfg);

/// Eigenvalue plus the test-function battery: constants (compact grids),
/// coordinate bumps, |∇u|·bump and five random smooth fields times a bump.
StabilityReport assess_stability(const StructuredGrid& grid, const Nonlinearity& nl,
                                 std::span<const double> u, const StabilityConfig& cfg);

/// Axisymmetric solution on the sphere: λ_min is the minimum over the given
/// azimuthal modes.
StabilityReport assess_sphere_stability(int n_theta, double radius, const Nonlinearity& nl,
                                        std::span<const double> u, const StabilityConfig& cfg,
                                        const std::vector<int>& modes = {0, 1, 2});

struct TranslationResidual {
  double residual = 0.0;
  bool degenerate = false;  // ∂_dir u vanished; residual reported as 0
};

/// ‖L(∂_dir u)‖ / ‖∂_dir u‖ in the weighted norm over nodes at least three
/// nodes from any truncation edge.
TranslationResidual translation_mode_residual(const StructuredGrid& grid, const Nonlinearity& nl,
                                              std::span<const double> u, int direction);

}  // namespace stablab

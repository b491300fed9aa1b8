#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stablab/grid.hpp"

namespace stablab {

/// The triple (f, f′, F) with F′ = f defining −Δ_g u = f(u) and its energy.
struct Nonlinearity {
  std::string name;
  double lambda = 1.0;  // scale of the scaled variants
  double shift = 0.0;   // c in f(u) + c·u
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  std::function<double(double)> primitive;
};

Nonlinearity allen_cahn();
/// λ(u − u³)
Nonlinearity scaled_allen_cahn(double lambda);
/// (1 − tanh u)/2: bounded, positive, C¹.
Nonlinearity positive_tanh();
/// f(u) + c·u, with f′ and F adjusted to match.
Nonlinearity with_shift(const Nonlinearity& base, double c);

std::vector<std::string> nonlinearity_names();
/// Throws ConfigError for unknown names.
Nonlinearity make_nonlinearity(std::string_view name, double lambda = 1.0);

/// Largest centred-difference mismatch of F′ vs f and f′ vs f over `samples`
/// points in [lo, hi].
double nonlinearity_consistency(const Nonlinearity& nl, double lo = -3.0, double hi = 3.0,
                                int samples = 100);

struct SolveConfig {
  int max_iterations = 100;       // Newton iterations
  double tolerance = 1e-9;        // on sup |residual|
  double min_damping = 1.0 / 1024;
  double flow_step = 0.0;         // 0 picks 1 / max(1, max f′)
  int flow_batch = 100;
  int max_flow_steps = 20000;
  double linear_tolerance = 1e-10;
  int linear_max_iterations = 5000;
};

struct SolveReport {
  int iterations = 0;   // accepted Newton steps
  int flow_steps = 0;   // accepted gradient-flow steps
  double residual = 0.0;
  double energy = 0.0;
  bool converged = false;
  std::vector<double> residual_history;  // sup residual after each accepted step
  std::vector<double> energy_history;
  std::vector<std::string> step_kinds;   // "newton" or "flow", per accepted step
  std::map<std::string, double> branch;  // e.g. the continuation parameter
  std::string message;

  nlohmann::json to_json() const;
};

struct SolveResult {
  Field u;
  SolveReport report;
};

/// r = −Δ_h u − f(u) at free nodes; 0 on Dirichlet nodes.
Field pde_residual(const Discretization& disc, const Nonlinearity& nl, std::span<const double> u);
double sup_residual(const Discretization& disc, const Nonlinearity& nl, std::span<const double> u);
/// E(u) = ½ D(u, u) − Σ w F(u)
double energy(const Discretization& disc, const Nonlinearity& nl, std::span<const double> u);

/// Damped Newton with a residual-and-energy line search; semi-implicit gradient
/// flow takes over whenever Newton cannot make progress. Values on Dirichlet
/// nodes are kept from u0. Never throws on non-convergence: the best iterate is
/// returned with converged = false.
SolveResult solve_semilinear(const Discretization& disc, const Nonlinearity& nl,
                             std::span<const double> u0, const SolveConfig& cfg);

/// Solves along a parameter sweep, seeding each solve with the previous solution.
std::vector<SolveResult> continuation(const Discretization& disc,
                                      const std::function<Nonlinearity(double)>& family,
                                      std::span<const double> params,
                                      std::span<const double> u0, const SolveConfig& cfg);

}  // namespace stablab

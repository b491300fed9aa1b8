#pragma once

#include <span>
#include <string>

#include "json.hpp"
#include "stablab/grid.hpp"
#include "stablab/solver.hpp"

namespace stablab {

/// Both sides of ∫(Ric(∇u,∇u) + |H_u|² − |∇|∇u||²)φ² ≤ ∫|∇u|²|∇φ|².
struct GFReport {
  std::string cutoff_id;
  double grad_floor = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;        // rhs − lhs
  double tolerance = 0.0;    // tol_GF
  double ricci_term = 0.0;   // ∫ Ric(∇u,∇u) φ²
  double kato_term = 0.0;    // ∫ (|H|² − |∇|∇u||²) φ², clamped on the critical set
  bool pass = false;         // slack ≥ −tolerance

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Node-wise evaluation with centred differences; the Kato gap is set to 0
/// where |∇u| ≤ grad_floor. tol_GF = 10 h² (∫(|H|² + |∇u|²)φ² + ∫|∇u|²|∇φ|²).
/// Throws SupportViolation unless φ vanishes near truncation edges.
GFReport gf_report(const StructuredGrid& grid, std::span<const double> u,
                   std::span<const double> phi, double grad_floor,
                   const std::string& cutoff_id = "phi");

/// |Q(|∇u|φ) − (rhs − lhs)| with the Kato gap left unclamped. Throws
/// NotASolution if sup |pde_residual| exceeds solution_tol.
double sz_derivation_residual(const StructuredGrid& grid, const Nonlinearity& nl,
                              std::span<const double> u, std::span<const double> phi,
                              double solution_tol = 1e-6);

struct VPIntegral {
  double ricci_term = 0.0;
  double kato_term = 0.0;
  double total() const { return ricci_term + kato_term; }
};

/// ∫ m (Ric(∇u,∇u) + |H|² − |∇|∇u||²) dV_g with a node weight field m (an
/// indicator of the region, or φ²).
VPIntegral vp_integral(const StructuredGrid& grid, std::span<const double> u,
                       std::span<const double> region_weight, double grad_floor);

}  // namespace stablab

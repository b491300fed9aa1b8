#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "stablab/grid.hpp"
#include "stablab/solver.hpp"

namespace stablab {

/// Lipschitz constant of the cutoff profile: max of the quintic smoothstep slope.
inline constexpr double kCutoffLipschitz = 15.0 / 8.0;

/// τ(t): 1 on |t| ≤ 1, 0 on |t| ≥ 2, a C² quintic smoothstep in between.
double cutoff_profile(double t);
double cutoff_profile_slope(double t);

/// τ_R = τ(d / R). Throws RadiusTooSmall if R ≤ 4h and SupportViolation if
/// {d < 2R} reaches within 4 nodes of a truncation edge.
Field make_cutoff(const StructuredGrid& grid, std::span<const double> dist, double R);

struct VolumeRow {
  double R = 0.0;
  double volume = 0.0;
  std::optional<double> r2;  // R⁻² V_R; empty at R = 0
  std::optional<double> r4;  // R⁻⁴ V_R
};

std::vector<VolumeRow> volume_growth_scan(const Discretization& disc,
                                          std::span<const double> dist,
                                          std::span<const double> radii);

struct CaccioppoliReport {
  double R = 0.0;
  double lhs = 0.0;      // ∫_{B_R} |∇u|²
  double rhs = 0.0;      // (C̄ / R²) V_{2R}
  double m_minus = 0.0;
  double m_plus = 0.0;
  double c_star = 0.0;   // 2 (m₊ − m₋)²
  double c_bar = 0.0;    // 4 (m₊ − m₋)² C_o²
  double volume_2r = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Checks ∫_{B_R}|∇u|² ≤ (C̄/R²) V_{2R}. Throws SignConditionViolated if f is
/// negative anywhere on a sample of [−10, 10] ∪ [m₋, m₊].
CaccioppoliReport caccioppoli_check(const StructuredGrid& grid, const Nonlinearity& nl,
                                    std::span<const double> u, std::span<const double> dist,
                                    double R, double slack = 0.0);

struct ZacRow {
  double R = 0.0;
  double energy = 0.0;          // ∫ |∇u|² |∇τ_R|²
  double sup_grad = 0.0;        // sup |∇u| over B_{2R} and the support of ∇τ_R
  double cutoff_energy = 0.0;   // ∫ |∇τ_R|²
  double volume_2r = 0.0;
  double link1 = 0.0;           // sup² ∫|∇τ_R|²
  double majorant = 0.0;        // sup² C_o² V_{2R} / R²
  bool link1_ok = false;        // energy ≤ link1
  bool link2_ok = false;        // link1 ≤ majorant (1 + 0.1)
};

std::vector<ZacRow> zac_energy(const StructuredGrid& grid, std::span<const double> u,
                               std::span<const double> dist, std::span<const double> radii);

/// φ = clamp((ln R_out − ln d) / (ln R_out − ln R_in), 0, 1).
Field log_cutoff(const Discretization& disc, std::span<const double> dist, double r_inner,
                 double r_outer);
/// Discrete Dirichlet energy of the logarithmic cutoff.
double parabolicity_probe(const Discretization& disc, std::span<const double> dist,
                          double r_outer, double r_inner = 1.0);

/// Columns R, V_R, R^-2 V_R, R^-4 V_R, zac_energy, majorant; rows matched by
/// index, empty cells where a value is undefined.
std::string scan_csv(const std::vector<VolumeRow>& volumes, const std::vector<ZacRow>& zac);

}  // namespace stablab
